#pragma once

#include <stdexcept>
#include <string>

namespace qpms {

// Base for every runtime numerical failure.  The CLI maps these to exit
// code 2; std::invalid_argument (bad inputs/config) maps to exit code 1.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Quadrature/sampling grid too coarse or too narrow for the requested value.
class precision_error : public numeric_error {
 public:
  explicit precision_error(const std::string& what) : numeric_error(what) {}
};

// Fock-space truncation lost too much state norm.
class cutoff_error : public numeric_error {
 public:
  explicit cutoff_error(const std::string& what) : numeric_error(what) {}
};

// Solver target unreachable within the bracket expansion limit.
class no_solution_error : public numeric_error {
 public:
  explicit no_solution_error(const std::string& what) : numeric_error(what) {}
};

// A quantity assumed monotone was observed not to be.
class nonmonotone_error : public numeric_error {
 public:
  explicit nonmonotone_error(const std::string& what) : numeric_error(what) {}
};

// An internal identity (e.g. non-negative variance) was violated.
class inconsistency_error : public numeric_error {
 public:
  explicit inconsistency_error(const std::string& what) : numeric_error(what) {}
};

// A statistic is undefined for the given inputs (e.g. zero variance SSMD).
class undefined_statistic_error : public numeric_error {
 public:
  explicit undefined_statistic_error(const std::string& what)
      : numeric_error(what) {}
};

}  // namespace qpms
