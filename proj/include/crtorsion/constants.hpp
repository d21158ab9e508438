#pragma once

#include <numbers>

namespace crtorsion {

inline constexpr const char* kVersion = "0.3.1";

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Euler-Mascheroni constant, 20 significant digits.
inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Gamma'(1) = -gamma.
inline constexpr double kGammaPrimeOne = -kEulerGamma;

/// Gamma'(1) as used by the torsion assembly. A mutant build sets it to zero
/// so the two-path torsion check has something to catch.
#ifdef CRTORSION_MUTATE_GAMMA_PRIME_ONE
inline constexpr double kTorsionGammaPrimeOne = 0.0;
#else
inline constexpr double kTorsionGammaPrimeOne = kGammaPrimeOne;
#endif

}  // namespace crtorsion
