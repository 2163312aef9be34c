#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace fuchsian {

// Exit codes: 0 ok, 1 bad input, 2 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct CheckOutcome {
    enum class Status { Pass, Fail, KnownErratum };
    Status status = Status::Fail;
    std::string detail;
};

struct PaperCheck {
    std::string name;
    std::string description;
    std::function<CheckOutcome(const std::string& fixture_dir)> run;
};

std::vector<PaperCheck> paper_checks();
std::string default_fixture_dir();

}  // namespace fuchsian
