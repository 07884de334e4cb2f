#include "qwell/classify.hpp"
#include "qwell/config.hpp"
#include "qwell/io.hpp"
#include "qwell/minimize.hpp"
#include "qwell/stability.hpp"
#include "qwell/sweeps.hpp"
#include "qwell/version.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_convergence = 3;
constexpr int exit_io = 4;

struct CliArgs {
    std::string config_path;
    std::string field_path;
    std::string out_dir;
    int workers = 0;
    std::uint64_t seed = 0;
    bool have_seed = false;
};

qwell::RunConfig load_config(const CliArgs& args) {
    qwell::RunConfig cfg = qwell::parse_config_file(args.config_path);
    if (args.workers > 0) cfg.workers = args.workers;
    if (args.have_seed) {
        cfg.initial.seed = args.seed;
        cfg.stability.seed = args.seed;
    }
    if (!args.out_dir.empty()) cfg.output.dir = args.out_dir;
    return cfg;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir);
}

json stability_json(const qwell::StabilityReport& rep) {
    json j;
    j["lambda1"] = rep.lambda1;
    j["lambda1_cross"] = rep.lambda1_cross;
    j["residual"] = rep.residual;
    j["stable"] = rep.stable;
    j["converged"] = rep.converged;
    j["stab_tol"] = rep.stab_tol;
    j["hessian_applies"] = rep.hessian_applies;
    return j;
}

int cmd_run(const CliArgs& args) {
    qwell::RunConfig cfg = load_config(args);
    const qwell::WellProblem prob = cfg.problem();
    ensure_dir(cfg.output.dir);

    qwell::MinimizeResult res = qwell::minimize_well(prob, cfg.initial, cfg.lbfgs);

    json summary;
    summary["version"] = qwell::version_string;
    summary["config_hash"] = cfg.hash;
    summary["converged"] = res.converged;
    summary["iterations"] = res.iterations;
    summary["grad_norm"] = res.grad_norm;
    summary["energy"] = {{"elastic", res.breakdown.elastic},
                         {"bulk", res.breakdown.bulk},
                         {"surface_lateral", res.breakdown.surface_lateral},
                         {"surface_topbottom", res.breakdown.surface_topbottom},
                         {"total", res.breakdown.total}};
    summary["mean_dz_sq"] = qwell::mean_dz_sq(res.field);

    qwell::ClassifyFeatures ft;
    const qwell::SolutionClass cls = qwell::classify(res.field, prob, &ft);
    summary["class"] = qwell::to_string(cls);

    if (cfg.stability.enabled) {
        if (cfg.stability.method == "both") {
            const auto rep = qwell::certify_stability(prob, res.field.coeffs, cfg.stability.seed);
            summary["stability"] = stability_json(rep);
        } else {
            const auto method = cfg.stability.method == "lanczos"
                                    ? qwell::EigenMethod::Lanczos
                                    : qwell::EigenMethod::GradientFlow;
            const auto rep = qwell::smallest_eigenvalue(prob, res.field.coeffs, method,
                                                        cfg.stability.seed);
            summary["stability"] = stability_json(rep);
        }
    }

    const std::string stem = cfg.output.dir + "/field";
    const std::string field_path =
        stem + (cfg.output.field_format == "csv" ? ".csv" : ".bin");
    qwell::save_field(res.field, field_path, cfg.hash);
    qwell::write_iterate_log(res.trace, cfg.output.dir + "/iterates.csv");
    if (cfg.output.slices) {
        qwell::export_slice_csv(res.field, prob, 0.0, cfg.output.dir + "/slice_z0.csv",
                                cfg.hash, cfg.output.vtk_nx);
        qwell::export_slice_csv(res.field, prob, 0.5 * prob.eps,
                                cfg.output.dir + "/slice_zmid.csv", cfg.hash, cfg.output.vtk_nx);
        qwell::export_slice_csv(res.field, prob, prob.eps, cfg.output.dir + "/slice_ztop.csv",
                                cfg.hash, cfg.output.vtk_nx);
    }
    if (cfg.output.vtk)
        qwell::export_vtk(res.field, prob, cfg.output.dir + "/field.vtk", cfg.hash,
                          cfg.output.vtk_nx);

    std::ofstream os(cfg.output.dir + "/summary.json");
    os << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << std::endl;
    return res.converged ? exit_ok : exit_convergence;
}

int cmd_sweep_bifurcation(const CliArgs& args) {
    qwell::RunConfig cfg = load_config(args);
    ensure_dir(cfg.output.dir);
    const auto rows = qwell::sweep_bifurcation(cfg);
    qwell::write_bifurcation_csv(rows, cfg.output.dir + "/bifurcation.csv", cfg.hash);
    bool all_ok = true;
    for (const auto& r : rows) {
        std::cout << "W=" << r.W;
        if (r.found)
            std::cout << " lambda_star=" << r.lambda_star << " bracket=[" << r.bracket_lo
                      << "," << r.bracket_hi << "]";
        else if (r.no_transition)
            std::cout << " no-transition";
        else
            std::cout << " no-upper-bracket";
        std::cout << "\n";
        for (const auto& p : r.probes) all_ok = all_ok && p.converged;
    }
    return all_ok ? exit_ok : exit_convergence;
}

int cmd_sweep_escaped(const CliArgs& args) {
    qwell::RunConfig cfg = load_config(args);
    ensure_dir(cfg.output.dir);
    const auto rows = qwell::sweep_escaped(cfg);
    qwell::write_escaped_csv(rows, cfg.output.dir + "/escaped.csv", cfg.hash);
    bool all_ok = true;
    for (const auto& r : rows) {
        std::cout << "eps=" << r.eps;
        if (r.found)
            std::cout << " wz_crit=" << r.wz_crit;
        else if (r.branch_absent)
            std::cout << " branch-absent";
        else
            std::cout << " stable-to-top";
        std::cout << "\n";
        for (const auto& p : r.probes) all_ok = all_ok && p.converged;
    }
    return all_ok ? exit_ok : exit_convergence;
}

int cmd_reduced2d(const CliArgs& args, bool bounds_only) {
    qwell::RunConfig cfg = load_config(args);
    ensure_dir(cfg.output.dir);
    const qwell::Reduced2DConfig& rc = cfg.reduced;
    const qwell::Grid2D grid = qwell::Grid2D::make(rc.domain, rc.n, rc.eta);

    qwell::ReducedState state;
    if (rc.quadrant) {
        state = qwell::solve_wors_quadrant(grid, cfg.material, rc.lambda_bar_sq);
    } else {
        qwell::ReducedInit init = qwell::ReducedInit::WorsLike;
        if (rc.init == "diagonal_like") init = qwell::ReducedInit::DiagonalLike;
        else if (rc.init == "random") init = qwell::ReducedInit::Random;
        else if (rc.init == "uniform") init = qwell::ReducedInit::Uniform;
        state = qwell::minimize_J(grid, cfg.material, rc.lambda_bar_sq, rc.constrain_q3, init,
                                  cfg.initial.seed);
    }
    const qwell::BoundsReport rep = qwell::verify_bounds(state);
    {
        std::ofstream os(cfg.output.dir + "/bounds.json");
        os << rep.to_json();
    }
    if (!bounds_only)
        qwell::export_reduced_csv(state, cfg.output.dir + "/reduced.csv", cfg.hash);
    std::cout << rep.to_json();
    return state.converged ? exit_ok : exit_convergence;
}

int cmd_classify(const CliArgs& args) {
    qwell::RunConfig cfg = load_config(args);
    const qwell::WellProblem prob = cfg.problem();
    qwell::SpectralField f = qwell::load_field(args.field_path);
    if (!f.grid->same_layout(*prob.grid))
        throw qwell::ConfigError("field layout does not match the configured grid");
    qwell::ClassifyFeatures ft;
    const qwell::SolutionClass cls = qwell::classify(f, prob, &ft);
    json j;
    j["class"] = qwell::to_string(cls);
    j["z_variation"] = ft.z_variation;
    j["q1_diag_sup"] = ft.q1_diag_sup;
    j["q2_mid_sup"] = ft.q2_mid_sup;
    j["boundary_winding"] = ft.boundary_winding;
    j["center_winding"] = ft.center_winding;
    std::cout << j.dump(2) << std::endl;
    return exit_ok;
}

int cmd_export(const CliArgs& args) {
    qwell::RunConfig cfg = load_config(args);
    const qwell::WellProblem prob = cfg.problem();
    ensure_dir(cfg.output.dir);
    qwell::SpectralField f = qwell::load_field(args.field_path);
    if (!f.grid->same_layout(*prob.grid))
        throw qwell::ConfigError("field layout does not match the configured grid");
    qwell::export_vtk(f, prob, cfg.output.dir + "/field.vtk", cfg.hash, cfg.output.vtk_nx);
    qwell::export_slice_csv(f, prob, 0.5 * prob.eps, cfg.output.dir + "/slice_zmid.csv",
                            cfg.hash, cfg.output.vtk_nx);
    return exit_ok;
}

}

int main(int argc, char** argv) {
    CLI::App app{std::string(qwell::version_string) +
                 " - nematic equilibria in three-dimensional square wells"};
    app.require_subcommand(1);
    app.fallthrough();

    CliArgs args;
    app.add_option("--workers", args.workers, "worker threads for sweeps");
    bool seed_given = false;
    std::uint64_t seed_val = 0;
    app.add_option("--seed", seed_val, "override random seeds")->each([&](const std::string&) {
        seed_given = true;
    });
    app.add_option("--out", args.out_dir, "output directory override");

    auto add_config = [&](CLI::App* sub, bool field_too = false) {
        sub->add_option("--config", args.config_path, "JSON configuration file")->required();
        if (field_too)
            sub->add_option("--field", args.field_path, "saved field file")->required();
    };

    CLI::App* run = app.add_subcommand("run", "minimize, certify and classify one well");
    add_config(run);
    CLI::App* swb = app.add_subcommand("sweep-bifurcation",
                                       "cross-state threshold vs lateral anchoring");
    add_config(swb);
    CLI::App* swe = app.add_subcommand("sweep-escaped",
                                       "critical plate anchoring of the escaped branch");
    add_config(swe);
    CLI::App* red = app.add_subcommand("reduced2d", "reduced cross-section system");
    add_config(red);
    CLI::App* vb = app.add_subcommand("verify-bounds", "reduced solve plus bound checks");
    add_config(vb);
    CLI::App* cls = app.add_subcommand("classify", "classify a saved field");
    add_config(cls, true);
    CLI::App* exp = app.add_subcommand("export", "export a saved field to VTK/CSV");
    add_config(exp, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_config;
    }
    args.have_seed = seed_given;
    args.seed = seed_val;

    try {
        if (run->parsed()) return cmd_run(args);
        if (swb->parsed()) return cmd_sweep_bifurcation(args);
        if (swe->parsed()) return cmd_sweep_escaped(args);
        if (red->parsed()) return cmd_reduced2d(args, false);
        if (vb->parsed()) return cmd_reduced2d(args, true);
        if (cls->parsed()) return cmd_classify(args);
        if (exp->parsed()) return cmd_export(args);
    } catch (const qwell::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    }
    return exit_config;
}
