#pragma once

#include <stdexcept>
#include <string>

namespace chronolex {

// Error categories map onto CLI exit codes (config 2, data 3, analysis 4).

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chronolex
