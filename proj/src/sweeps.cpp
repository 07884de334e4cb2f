#include "qwell/sweeps.hpp"

#include "qwell/minimize.hpp"
#include "qwell/stability.hpp"
#include "qwell/version.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <thread>

namespace qwell {

namespace {

void run_pool(int workers, int tasks, const std::function<void(int)>& body) {
    if (workers <= 1 || tasks <= 1) {
        for (int t = 0; t < tasks; ++t) body(t);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int t = next.fetch_add(1);
            if (t >= tasks) return;
            body(t);
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min(workers, tasks);
    pool.reserve(nthreads);
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

WellProblem probe_problem(const RunConfig& cfg, double lambda_bar_sq, double eps, double W1,
                          double W2, double Wz) {
    RunConfig c = cfg;
    c.lambda_bar_sq = lambda_bar_sq;
    c.eps = eps;
    c.anchoring.W1 = W1;
    c.anchoring.W2 = W2;
    c.anchoring.Wz = Wz;
    return c.problem();
}

}

std::vector<BifurcationRow> sweep_bifurcation(const RunConfig& cfg) {
    const BifurcationSweepConfig& sw = cfg.bifurcation;
    std::vector<BifurcationRow> rows(sw.W_list.size());

    auto probe = [&](double W, double lambda, BifurcationRow& row) {
        const WellProblem prob = probe_problem(cfg, lambda, sw.eps, W, W, cfg.anchoring.Wz);
        InitialCondition ic;
        ic.kind = InitKind::Diagonal;
        const MinimizeResult res = minimize_well(prob, ic, cfg.lbfgs);
        ProbeRecord rec;
        rec.param = lambda;
        rec.converged = res.converged;
        rec.energy = res.breakdown.total;
        rec.cls = classify(res.field, prob);
        row.probes.push_back(rec);
        return rec.cls == SolutionClass::WORS;
    };

    run_pool(cfg.workers, static_cast<int>(rows.size()), [&](int t) {
        BifurcationRow& row = rows[t];
        row.W = sw.W_list[t];
        double lo = sw.lambda_lo, hi = sw.lambda_hi;
        if (!probe(row.W, lo, row)) {
            row.no_transition = true;  // the cross state is absent for this anchoring
            return;
        }
        if (probe(row.W, hi, row)) {
            row.no_upper_bracket = true;
            row.lambda_star = hi;
            return;
        }
        while (hi - lo > sw.tol) {
            const double mid = 0.5 * (lo + hi);
            if (probe(row.W, mid, row))
                lo = mid;
            else
                hi = mid;
        }
        row.found = true;
        row.bracket_lo = lo;
        row.bracket_hi = hi;
        row.lambda_star = 0.5 * (lo + hi);
    });
    return rows;
}

std::vector<EscapedRow> sweep_escaped(const RunConfig& cfg) {
    const EscapedSweepConfig& sw = cfg.escaped;
    std::vector<EscapedRow> rows(sw.eps_list.size());

    auto probe = [&](double eps, double wz, EscapedRow& row) {
        const WellProblem prob = probe_problem(cfg, sw.lambda_bar_sq, eps, cfg.anchoring.W1,
                                               cfg.anchoring.W2, wz);
        InitialCondition ic;
        ic.kind = InitKind::EscapedMinus;
        const MinimizeResult res = minimize_well(prob, ic, cfg.lbfgs);
        ProbeRecord rec;
        rec.param = wz;
        rec.converged = res.converged;
        rec.energy = res.breakdown.total;
        rec.cls = classify(res.field, prob);
        bool ok = res.converged && (rec.cls == SolutionClass::EscapedMinus ||
                                    rec.cls == SolutionClass::EscapedPlus);
        if (ok) {
            const StabilityReport st = smallest_eigenvalue(
                prob, res.field.coeffs, EigenMethod::GradientFlow, cfg.stability.seed);
            rec.lambda1 = st.lambda1;
            ok = st.stable;
        }
        row.probes.push_back(rec);
        return ok;
    };

    run_pool(cfg.workers, static_cast<int>(rows.size()), [&](int t) {
        EscapedRow& row = rows[t];
        row.eps = sw.eps_list[t];
        double lo = sw.wz_lo, hi = sw.wz_hi;
        if (!probe(row.eps, lo, row)) {
            row.branch_absent = true;  // no stable escaped state even at weak anchoring
            return;
        }
        if (probe(row.eps, hi, row)) {
            row.stable_to_top = true;
            row.wz_crit = hi;
            return;
        }
        while (hi / lo > sw.ratio_tol) {
            const double mid = std::sqrt(lo * hi);
            if (probe(row.eps, mid, row))
                lo = mid;
            else
                hi = mid;
        }
        row.found = true;
        row.bracket_lo = lo;
        row.bracket_hi = hi;
        row.wz_crit = std::sqrt(lo * hi);
    });
    return rows;
}

void write_bifurcation_csv(const std::vector<BifurcationRow>& rows, const std::string& path,
                           std::uint64_t config_hash) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.precision(12);
    os << "# " << version_string << " bifurcation sweep, config " << config_hash << "\n";
    os << "W,found,lambda_star,bracket_lo,bracket_hi,no_transition,probes\n";
    for (const auto& r : rows)
        os << r.W << ',' << (r.found ? 1 : 0) << ',' << r.lambda_star << ',' << r.bracket_lo
           << ',' << r.bracket_hi << ',' << (r.no_transition ? 1 : 0) << ','
           << r.probes.size() << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

void write_escaped_csv(const std::vector<EscapedRow>& rows, const std::string& path,
                       std::uint64_t config_hash) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.precision(12);
    os << "# " << version_string << " escaped-branch sweep, config " << config_hash << "\n";
    os << "eps,found,wz_crit,bracket_lo,bracket_hi,branch_absent,probes\n";
    for (const auto& r : rows)
        os << r.eps << ',' << (r.found ? 1 : 0) << ',' << r.wz_crit << ',' << r.bracket_lo
           << ',' << r.bracket_hi << ',' << (r.branch_absent ? 1 : 0) << ','
           << r.probes.size() << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

}
