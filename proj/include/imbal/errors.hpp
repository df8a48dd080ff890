#ifndef IMBAL_ERRORS_HPP
#define IMBAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace imbal {

class InvalidParameter : public std::invalid_argument {
 public:
  explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

// The product-form measure needs every downward factor bounded away from
// zero; the level that broke it is carried along for the fallback solve.
class DegenerateChain : public std::runtime_error {
 public:
  DegenerateChain(const std::string& what, int level)
      : std::runtime_error(what), level_(level) {}
  int level() const noexcept { return level_; }

 private:
  int level_;
};

class NoInvariantMeasure : public std::runtime_error {
 public:
  explicit NoInvariantMeasure(const std::string& what) : std::runtime_error(what) {}
};

class BranchExplosion : public std::runtime_error {
 public:
  explicit BranchExplosion(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace imbal

#endif  // IMBAL_ERRORS_HPP
