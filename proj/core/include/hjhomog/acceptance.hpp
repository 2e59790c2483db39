#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace homog {

struct CriterionResult {
  std::string id;
  std::string description;
  bool pass = false;
  double measured = 0.0;   // worst measured discrepancy of the criterion
  double tolerance = 0.0;  // pinned bound it is held against
  std::string detail;
};

struct AcceptanceOptions {
  std::string filter;              // run only criteria whose id contains this
  unsigned threads = 1;
  bool tamper_closed_form = false; // negative control: bias the closed-form
                                   // route to prove the cross-checks can fail
};

// Runs the acceptance criteria, printing one "[ PASS ]"/"[ FAIL ]" line per
// criterion to `log`. Returns all results (pass and fail).
std::vector<CriterionResult> run_acceptance_suite(const AcceptanceOptions& options,
                                                  std::ostream& log);

}  // namespace homog
