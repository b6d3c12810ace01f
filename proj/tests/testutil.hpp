#ifndef EHCAP_TESTS_TESTUTIL_HPP
#define EHCAP_TESTS_TESTUTIL_HPP

#include <cmath>

// absolute-tolerance comparison; doctest's Approx is relative-only
inline bool close_to(double a, double b, double tol) { return std::abs(a - b) <= tol; }

#endif
