#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace coxlab {

// Street-system variant.
enum class Variant {
    DEL,       // pure Poisson-Delaunay edges (no grid, unbounded dependence range)
    DEL_GRID,  // Delaunay of Poisson points superimposed with the sparse grid L*Z^2
    WIDTH,     // grid variant with edges thickened to half-width w0 (area environment)
    CAPPED,    // grid variant with per-cube edge length capped at rho
};

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// All scalar model parameters. `validate` produces a checked copy.
struct ModelParams {
    int d = 2;                    // geometry is planar; carried for indexing formulas
    double M = 1.0;               // coarse block scale
    std::int64_t b_inv = 5;       // 1/b; must be an integer > 2*d*M
    double lambda = 1.0;          // device intensity per unit environment mass
    double lambda_del = 1.0;      // Poisson seed intensity for the triangulation
    double L = 1.0;               // sparse grid spacing (grid variants)
    double rho = 1.0;             // intensity cap / driver mark ceiling
    double w0 = 0.0;              // street half-width (WIDTH)
    double eta = 1e-6;            // support threshold for essential connectedness
    Variant variant = Variant::DEL_GRID;
    double ball_radius = 0.5;     // connection ball radius

    double b() const { return 1.0 / double(b_inv); }
    double cube_side() const { return M / double(b_inv); }  // side of Q(x; b, M)
};

// Parameters that passed validation. For WIDTH the cap is normalized to the
// cube area (Mb)^2, which bounds every site mass.
class ValidatedParams {
public:
    const ModelParams& raw() const { return p_; }

    int d() const { return p_.d; }
    double M() const { return p_.M; }
    std::int64_t b_inv() const { return p_.b_inv; }
    double b() const { return p_.b(); }
    double cube_side() const { return p_.cube_side(); }
    double lambda() const { return p_.lambda; }
    double lambda_del() const { return p_.lambda_del; }
    double L() const { return p_.L; }
    double rho() const { return rho_; }
    double w0() const { return p_.w0; }
    double eta() const { return p_.eta; }
    Variant variant() const { return p_.variant; }
    double ball_radius() const { return p_.ball_radius; }

    bool has_grid() const { return p_.variant != Variant::DEL; }
    std::int64_t sites_per_block_side() const { return p_.b_inv; }
    std::int64_t sites_per_block() const { return p_.b_inv * p_.b_inv; }

    friend ValidatedParams validate_params(const ModelParams& p);

private:
    ModelParams p_;
    double rho_ = 0.0;
};

// Checks the scale rules and positivity constraints. Throws Error with code
// INVALID_SCALE, INVALID_GRID or NONPOSITIVE; the message lists every
// violated rule.
ValidatedParams validate_params(const ModelParams& p);

// Non-throwing variant: returns the list of violated rules (empty if valid).
std::vector<std::string> check_params(const ModelParams& p);

}  // namespace coxlab
