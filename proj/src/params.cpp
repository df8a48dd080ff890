#include "imbal/params.hpp"

#include <cmath>
#include <sstream>

#include "imbal/errors.hpp"

namespace imbal {

void ModelParams::validate() const {
  if (n < 2) throw InvalidParameter("N must be at least 2");
  if (d < 1) throw InvalidParameter("d must be positive");
  if (2 * d > n - 1) throw InvalidParameter("2d must not exceed N-1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidParameter("alpha must be positive and finite");
  if (!(gamma >= -1.0 && gamma < 0.0)) throw InvalidParameter("gamma must lie in [-1, 0)");
  if (!(q > 0.0 && q <= 1.0)) throw InvalidParameter("q must lie in (0, 1]");
  if (!(beta > 0.0)) throw InvalidParameter("beta must be positive (or infinite)");
}

std::string ModelParams::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "N=" << n << " d=" << d << " alpha=" << alpha << " gamma=" << gamma << " q=" << q
     << " beta=" << (frozen() ? std::string("inf") : std::to_string(beta));
  return os.str();
}

}  // namespace imbal
