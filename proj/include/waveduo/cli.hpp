#pragma once

#include <iosfwd>

namespace waveduo::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kInstability = 2, kIo = 3 };

/// Entry point shared by the waveduo binary and the CLI tests.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace waveduo::cli
