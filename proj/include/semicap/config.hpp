// System definitions read from sectioned key=value text.
//
//   [system]      alphabet = 0,1      dim = 1      mode = single|strict|weak
//   [constraint]  type = rll|forbidden|linear|full
//                 k, p                    (rll)
//                 shape, forbidden        (forbidden)
//                 shape, rows             (linear)
//                 shape                   (full)
//   [epsilon]     values = 0, 0.001, 0.01
//   [solver]      seed, restarts, max_iterations, gap_tolerance,
//                 hind_restarts, max_sweeps, trials
//
// See README.md for the value syntax and defaults. Unknown sections and keys
// are rejected with ConfigError.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semicap/lattice.hpp"
#include "semicap/scs.hpp"

namespace semicap {

enum class SystemMode { Single, Strict, Weak };

struct SolverSettings {
    std::uint64_t seed = 1;
    std::size_t restarts = 5;
    std::size_t max_iterations = 50000;
    double gap_tolerance = 1e-6;
    std::size_t hind_restarts = 20;
    std::size_t max_sweeps = 200;
    std::size_t trials = 2000;
};

struct SystemConfig {
    Alphabet alphabet = Alphabet::binary();
    int dim = 1;
    SystemMode mode = SystemMode::Single;
    // The single system, or the 1-D factor of an axial product.
    ConstraintSet gamma;
    // Set when the constraint is a list of forbidden patterns (rll with p = 0
    // counts as forbidding 1^{k+1}).
    std::optional<std::vector<Pattern>> forbidden;
    std::vector<double> eps = {0.0};
    SolverSettings solver;
    // FNV-1a of the source text, 16 hex digits.
    std::string hash;

    bool axial() const { return mode != SystemMode::Single; }
    AxialSystem system() const;
};

SystemConfig parse_config(std::string_view text);
SystemConfig load_config(const std::string& path);

// Shape syntax: "segment:k", "cube:k", or points "x,y;x,y;..." in dimension dim.
Shape parse_shape(std::string_view text, int dim);

std::string fnv1a_hex(std::string_view text);

} // namespace semicap
