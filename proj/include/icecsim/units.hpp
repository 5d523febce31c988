#pragma once

namespace icec {

// Time conversion between atomic units and femtoseconds. All internal
// arithmetic is in atomic units; femtoseconds appear only at I/O boundaries.
inline constexpr double kFsPerAu = 0.02418884326;
inline constexpr double kAuPerFs = 1.0 / kFsPerAu;

inline double au_to_fs(double t_au) { return t_au * kFsPerAu; }
inline double fs_to_au(double t_fs) { return t_fs * kAuPerFs; }

} // namespace icec
