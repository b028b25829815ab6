#pragma once

// Values from tests/oracles/mp_oracles.py (mpmath, 50 digits).
namespace frozen {

inline constexpr double K1_1 = 0.60190723019723457474;
inline constexpr double K0_1 = 0.42102443824070833334;
inline constexpr double K03_07 = 0.68956248975697501701;
inline constexpr double K25_1em6 = 3759942411945874.0966;
inline constexpr double K2_400 = 1.2057864373672811631e-175;
inline constexpr double K1_1em6 = 999999.99999278427896;
inline constexpr double K01_1em4 = 10.821310058094727516;

inline constexpr double bessel_tail_1_1_1 = 0.27362075202611622173;
inline constexpr double bessel_tail_3_05_2 = 1.7510559644467015929;
inline constexpr double bessel_tail_1_1_30 = 6.8890253607858374205e-16;

inline constexpr double levy_density_1_1_1 = 0.19159302193728242904;
inline constexpr double kernel_1_1_0_1 = 0.52080382999167004642;
inline constexpr double kernel_3_05_15_07 = 0.011564725166372815035;
inline constexpr double tail_mass_1_1_1 = 0.17419238086991253065;
inline constexpr double tail_mass_3_05_08 = 1.1533976091206575453;

inline constexpr double l_d1_m1_r1 = 3.6546935588589903907;
inline constexpr double l_d3_m05_r2 = 4.5686717971506061074;
inline constexpr double l_ratio_d1_m001_r10 = 0.159391671655039244467989190872;  // l(10) / 10 - 1

inline constexpr double m2_d1_m1_eps01 = 0.063316637294861195707;
inline constexpr double trunc_resid_d1_m0_xi1_eps01 = 0.031822148445258900421;

inline constexpr double abs_moment_075_m01_t05 = 0.88266231164238033913;
inline constexpr double abs_moment_075_m1_t05 = 0.53370418294002330158;

}  // namespace frozen
