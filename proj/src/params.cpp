#include "coxlab/params.hpp"

#include <cmath>
#include <sstream>

#include "coxlab/error.hpp"

namespace coxlab {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::DEL: return "DEL";
        case Variant::DEL_GRID: return "DEL_GRID";
        case Variant::WIDTH: return "WIDTH";
        case Variant::CAPPED: return "CAPPED";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "DEL") return Variant::DEL;
    if (name == "DEL_GRID") return Variant::DEL_GRID;
    if (name == "WIDTH") return Variant::WIDTH;
    if (name == "CAPPED") return Variant::CAPPED;
    throw Error(ErrorCode::CONFIG, "unknown variant '" + name + "'");
}

std::vector<std::string> check_params(const ModelParams& p) {
    std::vector<std::string> bad;
    std::ostringstream os;
    if (p.d != 2) bad.push_back("INVALID_SCALE: d must be 2");
    if (!(p.M > 0.0)) bad.push_back("NONPOSITIVE: M must be positive");
    if (p.b_inv <= 0) {
        bad.push_back("INVALID_SCALE: 1/b must be a positive integer");
    } else if (p.M > 0.0 && !(double(p.b_inv) > 2.0 * p.d * p.M)) {
        os << "INVALID_SCALE: 1/b = " << p.b_inv << " must exceed 2dM = " << 2.0 * p.d * p.M;
        bad.push_back(os.str());
    }
    if (!(p.lambda >= 0.0)) bad.push_back("NONPOSITIVE: lambda must be >= 0");
    if (!(p.lambda_del > 0.0)) bad.push_back("NONPOSITIVE: lambda_del must be > 0");
    if (!(p.rho > 0.0)) bad.push_back("NONPOSITIVE: rho must be > 0");
    if (!(p.eta > 0.0)) bad.push_back("NONPOSITIVE: eta must be > 0");
    if (p.variant != Variant::DEL) {
        if (!(p.L >= 1.0)) bad.push_back("INVALID_GRID: L must be >= 1");
        // Grid variants require M = M'L for a positive integer M'.
        double ratio = p.M / p.L;
        double rounded = std::round(ratio);
        if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
            std::ostringstream g;
            g << "INVALID_GRID: M = " << p.M << " must be a positive integer multiple of L = " << p.L;
            bad.push_back(g.str());
        }
    }
    if (!(p.w0 >= 0.0)) bad.push_back("NONPOSITIVE: w0 must be >= 0");
    if (p.variant == Variant::WIDTH && !(p.w0 > 0.0)) bad.push_back("NONPOSITIVE: WIDTH requires w0 > 0");
    if (!(p.ball_radius > 0.0)) bad.push_back("NONPOSITIVE: ball_radius must be > 0");
    double rho_eff = p.variant == Variant::WIDTH ? p.cube_side() * p.cube_side() : p.rho;
    if (p.rho > 0 && p.eta > 0 && p.eta > rho_eff) bad.push_back("NONPOSITIVE: eta must not exceed rho");
    return bad;
}

ValidatedParams validate_params(const ModelParams& p) {
    auto bad = check_params(p);
    if (!bad.empty()) {
        std::string msg;
        for (const auto& r : bad) {
            if (!msg.empty()) msg += "; ";
            msg += r;
        }
        ErrorCode code = ErrorCode::INVALID_SCALE;
        if (bad.front().rfind("INVALID_GRID", 0) == 0) code = ErrorCode::INVALID_GRID;
        if (bad.front().rfind("NONPOSITIVE", 0) == 0) code = ErrorCode::NONPOSITIVE;
        throw Error(code, msg);
    }
    ValidatedParams vp;
    vp.p_ = p;
    // WIDTH masses are areas inside a cube, so the cube area is the cap.
    vp.rho_ = p.variant == Variant::WIDTH ? p.cube_side() * p.cube_side() : p.rho;
    return vp;
}

}  // namespace coxlab
