#pragma once

#include <sstream>

#include "codesign/order.hpp"

namespace fixtures {

// Twelve-element resource lattice a..l from the elimination illustration.
inline codesign::Poset hasse_twelve() {
    std::istringstream in(R"(
a < b
a < c
a < d
b < e
b < f
b < g
c < f
c < h
d < g
d < h
e < i
e < j
f < i
f < k
g < j
g < k
h < k
i < l
j < l
k < l
)");
    return codesign::parse_cover_list(in);
}

inline codesign::Poset diamond() {
    std::istringstream in("bot < a\nbot < b\na < top\nb < top\n");
    return codesign::parse_cover_list(in);
}

}  // namespace fixtures
