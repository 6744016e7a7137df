#pragma once

namespace sarp {

// Unit system: time in ps, energy in meV, angular frequency in rad/ps,
// length (wavelengths) in nm.
inline constexpr double kHbarMeVps = 0.6582119569;  // meV*ps
inline constexpr double kHcEvNm = 1239.841984;      // eV*nm

}  // namespace sarp
