#include "qwell/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace qwell {

namespace {

void require_keys(const json& j, const char* section, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(std::string(section) + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(std::string("unknown key '") + it.key() + "' in " + section);
}

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
    return j[key].get<double>();
}

int integer(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer())
        throw ConfigError(std::string("'") + key + "' must be an integer");
    return j[key].get<int>();
}

bool boolean(const json& j, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_boolean()) throw ConfigError(std::string("'") + key + "' must be a boolean");
    return j[key].get<bool>();
}

std::string str(const json& j, const char* key, const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
    return j[key].get<std::string>();
}

}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

WellProblem RunConfig::problem() const {
    WellProblem p;
    p.lambda_bar_sq = lambda_bar_sq;
    p.eps = eps;
    p.delta = delta;
    p.material = material;
    p.anchoring = anchoring;
    p.grid = std::make_shared<SpectralGrid>(SpectralGrid::make(
        {basis_xy, modes[0]}, {basis_xy, modes[1]}, {BasisKind::Chebyshev, modes[2]}, eps,
        quad_factor));
    p.validate();
    return p;
}

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    c.hash = fnv1a64(j.dump());

    require_keys(j, "config",
                 {"material", "well", "anchoring", "grid", "initial", "lbfgs", "stability",
                  "output", "sweep_bifurcation", "sweep_escaped", "reduced2d", "workers"});

    if (j.contains("material")) {
        const json& m = j["material"];
        require_keys(m, "material", {"A", "A_ratio", "B", "C", "L"});
        c.material.B = num(m, "B", c.material.B);
        c.material.C = num(m, "C", c.material.C);
        c.material.L_elastic = num(m, "L", c.material.L_elastic);
        if (m.contains("A") && m.contains("A_ratio"))
            throw ConfigError("material: give either A or A_ratio, not both");
        if (m.contains("A")) {
            c.material.A = num(m, "A", 0.0);
        } else {
            const double ratio = num(m, "A_ratio", -1.0 / 3.0);
            c.material.A = ratio * c.material.B * c.material.B / c.material.C;
        }
        try {
            c.material.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("material: ") + e.what());
        }
    } else {
        c.material = default_material();
    }

    if (j.contains("well")) {
        const json& w = j["well"];
        require_keys(w, "well", {"lambda_bar_sq", "eps", "delta"});
        c.lambda_bar_sq = num(w, "lambda_bar_sq", c.lambda_bar_sq);
        c.eps = num(w, "eps", c.eps);
        c.delta = num(w, "delta", c.delta);
        if (!(c.lambda_bar_sq > 0.0)) throw ConfigError("well: lambda_bar_sq must be > 0");
        if (!(c.eps > 0.0)) throw ConfigError("well: eps must be > 0");
        if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("well: delta must be in (0,1)");
    }

    if (j.contains("anchoring")) {
        const json& a = j["anchoring"];
        require_keys(a, "anchoring",
                     {"W1", "W2", "Wz", "alpha_z", "gamma_z", "lateral", "alpha", "gamma"});
        c.anchoring.W1 = num(a, "W1", c.anchoring.W1);
        c.anchoring.W2 = num(a, "W2", c.anchoring.W2);
        c.anchoring.Wz = num(a, "Wz", c.anchoring.Wz);
        c.anchoring.alpha_z = num(a, "alpha_z", c.anchoring.alpha_z);
        c.anchoring.gamma_z = num(a, "gamma_z", c.anchoring.gamma_z);
        const std::string lat = str(a, "lateral", "full_target");
        if (lat == "full_target")
            c.anchoring.lateral = LateralVariant::FullTarget;
        else if (lat == "relaxed")
            c.anchoring.lateral = LateralVariant::Relaxed;
        else
            throw ConfigError("anchoring: lateral must be 'full_target' or 'relaxed'");
        c.anchoring.alpha = num(a, "alpha", c.anchoring.alpha);
        c.anchoring.gamma = num(a, "gamma", c.anchoring.gamma);
        try {
            c.anchoring.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("anchoring: ") + e.what());
        }
    }

    if (j.contains("grid")) {
        const json& g = j["grid"];
        require_keys(g, "grid", {"basis_xy", "modes", "quad_factor"});
        const std::string b = str(g, "basis_xy", "chebyshev");
        if (b == "chebyshev")
            c.basis_xy = BasisKind::Chebyshev;
        else if (b == "fourier")
            c.basis_xy = BasisKind::Fourier;
        else
            throw ConfigError("grid: basis_xy must be 'chebyshev' or 'fourier'");
        if (g.contains("modes")) {
            if (!g["modes"].is_array() || g["modes"].size() != 3)
                throw ConfigError("grid: modes must be [L, M, N]");
            for (int k = 0; k < 3; ++k) {
                if (!g["modes"][k].is_number_integer())
                    throw ConfigError("grid: modes entries must be integers");
                c.modes[k] = g["modes"][k].get<int>();
                if (c.modes[k] < 2 || c.modes[k] > 96)
                    throw ConfigError("grid: modes must lie in [2, 96]");
            }
        }
        c.quad_factor = integer(g, "quad_factor", 2);
        if (c.quad_factor < 2 || c.quad_factor > 4)
            throw ConfigError("grid: quad_factor must be 2, 3 or 4");
    }

    if (j.contains("initial")) {
        const json& i = j["initial"];
        require_keys(i, "initial", {"kind", "seed", "mixed_top", "mixed_bottom"});
        try {
            c.initial.kind = init_kind_from_string(str(i, "kind", "diagonal"));
            c.initial.mixed_top = init_kind_from_string(str(i, "mixed_top", "diagonal"));
            c.initial.mixed_bottom =
                init_kind_from_string(str(i, "mixed_bottom", "diagonal_alt"));
        } catch (const std::exception& e) {
            throw ConfigError(std::string("initial: ") + e.what());
        }
        const double seed = num(i, "seed", 1.0);
        if (seed < 0.0) throw ConfigError("initial: seed must be >= 0");
        c.initial.seed = static_cast<std::uint64_t>(seed);
    }

    if (j.contains("lbfgs")) {
        const json& l = j["lbfgs"];
        require_keys(l, "lbfgs", {"memory", "grad_tol", "max_iters", "c1", "c2"});
        c.lbfgs.memory = integer(l, "memory", c.lbfgs.memory);
        c.lbfgs.grad_tol = num(l, "grad_tol", c.lbfgs.grad_tol);
        c.lbfgs.max_iters = integer(l, "max_iters", c.lbfgs.max_iters);
        c.lbfgs.c1 = num(l, "c1", c.lbfgs.c1);
        c.lbfgs.c2 = num(l, "c2", c.lbfgs.c2);
        try {
            c.lbfgs.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("lbfgs: ") + e.what());
        }
    }

    if (j.contains("stability")) {
        const json& s = j["stability"];
        require_keys(s, "stability", {"enabled", "method", "seed"});
        c.stability.enabled = boolean(s, "enabled", true);
        c.stability.method = str(s, "method", "both");
        if (c.stability.method != "both" && c.stability.method != "gradient_flow" &&
            c.stability.method != "lanczos")
            throw ConfigError("stability: method must be gradient_flow, lanczos or both");
        c.stability.seed = static_cast<std::uint64_t>(num(s, "seed", 2024.0));
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        require_keys(o, "output", {"dir", "field_format", "vtk", "slices", "vtk_nx"});
        c.output.dir = str(o, "dir", ".");
        c.output.field_format = str(o, "field_format", "bin");
        if (c.output.field_format != "bin" && c.output.field_format != "csv")
            throw ConfigError("output: field_format must be 'bin' or 'csv'");
        c.output.vtk = boolean(o, "vtk", false);
        c.output.slices = boolean(o, "slices", true);
        c.output.vtk_nx = integer(o, "vtk_nx", 64);
        if (c.output.vtk_nx < 8 || c.output.vtk_nx > 512)
            throw ConfigError("output: vtk_nx must lie in [8, 512]");
    }

    if (j.contains("sweep_bifurcation")) {
        const json& s = j["sweep_bifurcation"];
        require_keys(s, "sweep_bifurcation", {"W_list", "lambda_lo", "lambda_hi", "tol", "eps"});
        if (s.contains("W_list")) {
            if (!s["W_list"].is_array() || s["W_list"].empty())
                throw ConfigError("sweep_bifurcation: W_list must be a nonempty array");
            c.bifurcation.W_list.clear();
            for (const auto& v : s["W_list"]) {
                if (!v.is_number() || v.get<double>() <= 0.0)
                    throw ConfigError("sweep_bifurcation: W_list entries must be positive");
                c.bifurcation.W_list.push_back(v.get<double>());
            }
        }
        c.bifurcation.lambda_lo = num(s, "lambda_lo", c.bifurcation.lambda_lo);
        c.bifurcation.lambda_hi = num(s, "lambda_hi", c.bifurcation.lambda_hi);
        c.bifurcation.tol = num(s, "tol", c.bifurcation.tol);
        c.bifurcation.eps = num(s, "eps", c.bifurcation.eps);
        if (!(c.bifurcation.lambda_lo > 0.0 && c.bifurcation.lambda_hi > c.bifurcation.lambda_lo))
            throw ConfigError("sweep_bifurcation: need 0 < lambda_lo < lambda_hi");
        if (!(c.bifurcation.tol > 0.0)) throw ConfigError("sweep_bifurcation: tol must be > 0");
    }

    if (j.contains("sweep_escaped")) {
        const json& s = j["sweep_escaped"];
        require_keys(s, "sweep_escaped",
                     {"eps_list", "wz_lo", "wz_hi", "ratio_tol", "lambda_bar_sq"});
        if (s.contains("eps_list")) {
            if (!s["eps_list"].is_array() || s["eps_list"].empty())
                throw ConfigError("sweep_escaped: eps_list must be a nonempty array");
            c.escaped.eps_list.clear();
            for (const auto& v : s["eps_list"]) {
                if (!v.is_number() || v.get<double>() <= 0.0)
                    throw ConfigError("sweep_escaped: eps_list entries must be positive");
                c.escaped.eps_list.push_back(v.get<double>());
            }
        }
        c.escaped.wz_lo = num(s, "wz_lo", c.escaped.wz_lo);
        c.escaped.wz_hi = num(s, "wz_hi", c.escaped.wz_hi);
        c.escaped.ratio_tol = num(s, "ratio_tol", c.escaped.ratio_tol);
        c.escaped.lambda_bar_sq = num(s, "lambda_bar_sq", c.escaped.lambda_bar_sq);
        if (!(c.escaped.wz_lo > 0.0 && c.escaped.wz_hi > c.escaped.wz_lo))
            throw ConfigError("sweep_escaped: need 0 < wz_lo < wz_hi");
        if (!(c.escaped.ratio_tol > 1.0))
            throw ConfigError("sweep_escaped: ratio_tol must exceed 1");
    }

    if (j.contains("reduced2d")) {
        const json& r = j["reduced2d"];
        require_keys(r, "reduced2d",
                     {"domain", "n", "eta", "lambda_bar_sq", "constrain_q3", "quadrant", "init"});
        const std::string d = str(r, "domain", "truncated");
        if (d == "truncated")
            c.reduced.domain = Domain2DKind::TruncatedDiamond;
        else if (d == "full_square")
            c.reduced.domain = Domain2DKind::FullSquare;
        else
            throw ConfigError("reduced2d: domain must be 'truncated' or 'full_square'");
        c.reduced.n = integer(r, "n", c.reduced.n);
        c.reduced.eta = num(r, "eta", c.reduced.eta);
        c.reduced.lambda_bar_sq = num(r, "lambda_bar_sq", c.reduced.lambda_bar_sq);
        c.reduced.constrain_q3 = boolean(r, "constrain_q3", true);
        c.reduced.quadrant = boolean(r, "quadrant", false);
        c.reduced.init = str(r, "init", "wors_like");
        if (c.reduced.init != "wors_like" && c.reduced.init != "diagonal_like" &&
            c.reduced.init != "random" && c.reduced.init != "uniform")
            throw ConfigError("reduced2d: unknown init");
    }

    c.workers = integer(j, "workers", 1);
    if (c.workers < 1 || c.workers > 256) throw ConfigError("workers must lie in [1, 256]");
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

}
