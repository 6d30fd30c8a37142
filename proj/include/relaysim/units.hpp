#ifndef RELAYSIM_UNITS_HPP
#define RELAYSIM_UNITS_HPP

#include <cmath>

namespace relaysim {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

} // namespace relaysim

#endif
