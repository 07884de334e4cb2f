#include "qwell/energy.hpp"

#include "qwell/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace qwell {

QTensor surface_g_matrix(const QTensor& q, double s_plus, double alpha_z, double gamma_z) {
    const double a = alpha_z * (q.q33() + s_plus / 3.0);
    QTensor g;
    g.p = {-(2.0 / 3.0) * a, 0.0, gamma_z * q[2], -(2.0 / 3.0) * a, gamma_z * q[4]};
    return g;
}

double plate_density(const QTensor& q, const AnchoringConfig& a, double wz, double s_plus) {
    const double e1 = q.q33() + s_plus / 3.0;
    return wz * (a.alpha_z * e1 * e1 + a.gamma_z * (q[2] * q[2] + q[4] * q[4]));
}

double lateral_density(const QTensor& q, double g, int axis, const AnchoringConfig& a,
                       double omega, double s_plus) {
    if (a.lateral == LateralVariant::FullTarget) {
        // |Q - g (e x e - I/3)|^2, target components (p1, p4) = (2g/3, -g/3)
        // for e = x and (-g/3, 2g/3) for e = y.
        const double t1 = axis == 0 ? 2.0 * g / 3.0 : -g / 3.0;
        const double t4 = axis == 0 ? -g / 3.0 : 2.0 * g / 3.0;
        const double m1 = q[0] - t1, m2 = q[1], m3 = q[2], m4 = q[3] - t4, m5 = q[4];
        return omega * 2.0 * (m1 * m1 + m4 * m4 + m1 * m4 + m2 * m2 + m3 * m3 + m5 * m5);
    }
    if (axis == 0) {
        const double e1 = q[0] - 2.0 * s_plus / 3.0;
        return omega * (a.alpha * e1 * e1 + a.gamma * (q[1] * q[1] + q[2] * q[2]));
    }
    const double e1 = q[3] - 2.0 * s_plus / 3.0;
    return omega * (a.alpha * e1 * e1 + a.gamma * (q[1] * q[1] + q[4] * q[4]));
}

EnergyModel::EnergyModel(const WellProblem& prob) : prob_(prob) {
    prob_.validate();
    sp_ = prob_.s_plus();
    const SpectralGrid& g = *prob_.grid;
    w3d_.resize(static_cast<std::size_t>(g.n_nodes_total()));
    std::size_t idx = 0;
    for (int i = 0; i < g.ax.nq; ++i)
        for (int j = 0; j < g.ay.nq; ++j)
            for (int k = 0; k < g.az.nq; ++k)
                w3d_[idx++] = g.ax.w[i] * g.ay.w[j] * g.az.w[k];

    auto build_face = [&](Face f, const GridAxis& t1, const GridAxis& t2, bool lateral) {
        auto& list = face_nodes_[static_cast<int>(f)];
        list.reserve(static_cast<std::size_t>(t1.nq) * t2.nq);
        for (int i = 0; i < t1.nq; ++i)
            for (int j = 0; j < t2.nq; ++j) {
                FaceNode fn;
                fn.idx = g.face_node_index(f, i * t2.nq + j);
                fn.w = t1.w[i] * t2.w[j];
                fn.g = lateral ? g_profile(t1.x[i], sp_, prob_.delta) : 0.0;
                list.push_back(fn);
            }
    };
    // Lateral faces carry the wall profile g along their in-plane coordinate.
    build_face(Face::YMin, g.ax, g.az, true);
    build_face(Face::YMax, g.ax, g.az, true);
    build_face(Face::XMin, g.ay, g.az, true);
    build_face(Face::XMax, g.ay, g.az, true);
    build_face(Face::ZMin, g.ax, g.ay, false);
    build_face(Face::ZMax, g.ax, g.ay, false);
}

double EnergyModel::energy(const std::vector<double>& coeffs, EnergyBreakdown* bd) {
    return evaluate(coeffs, nullptr, bd);
}

double EnergyModel::energy_grad(const std::vector<double>& coeffs, std::vector<double>& grad,
                                EnergyBreakdown* bd) {
    return evaluate(coeffs, &grad, bd);
}

double EnergyModel::evaluate(const std::vector<double>& coeffs, std::vector<double>* grad,
                             EnergyBreakdown* bd) {
    const SpectralGrid& g = *prob_.grid;
    const auto& K = kern::active_ops();
    if (coeffs.size() != static_cast<std::size_t>(g.dof_total()))
        throw std::invalid_argument("EnergyModel: coefficient vector does not match grid");

    synthesize(g, coeffs.data(), cv_);

    const std::size_t n = static_cast<std::size_t>(g.n_nodes_total());
    const bool want_grad = grad != nullptr;
    if (want_grad) {
        for (int c = 0; c < 5; ++c) {
            vbar_[c].assign(n, 0.0);
            dxbar_[c].assign(n, 0.0);
            dybar_[c].assign(n, 0.0);
            dzbar_[c].assign(n, 0.0);
        }
    }

    EnergyBreakdown b;
    const MaterialParams& m = prob_.material;
    const double bf = prob_.bulk_factor();

    const double* vp[5];
    for (int c = 0; c < 5; ++c) vp[c] = cv_.v[c].data();

    // elastic
    for (int dir = 0; dir < 3; ++dir) {
        auto& darr = dir == 0 ? cv_.dx : (dir == 1 ? cv_.dy : cv_.dz);
        const double* dp[5];
        for (int c = 0; c < 5; ++c) dp[c] = darr[c].data();
        if (want_grad) {
            auto& gb = dir == 0 ? dxbar_ : (dir == 1 ? dybar_ : dzbar_);
            double* gp[5];
            for (int c = 0; c < 5; ++c) gp[c] = gb[c].data();
            b.elastic += K.elastic_energy_grad(n, dp, w3d_.data(), 1.0, gp);
        } else {
            b.elastic += K.elastic_energy(n, dp, w3d_.data());
        }
    }

    // bulk
    if (want_grad) {
        double* gp[5];
        for (int c = 0; c < 5; ++c) gp[c] = vbar_[c].data();
        b.bulk = bf * K.bulk_energy_grad(n, vp, w3d_.data(), m.A, m.B, m.C, bf, gp);
    } else {
        b.bulk = bf * K.bulk_energy(n, vp, w3d_.data(), m.A, m.B, m.C);
    }

    // top and bottom plates
    const double wz = prob_.anchoring.Wz > 0.0 ? prob_.wz() : 0.0;
    if (wz > 0.0) {
        const AnchoringConfig& a = prob_.anchoring;
        for (Face f : {Face::ZMin, Face::ZMax}) {
            for (const FaceNode& fn : face_nodes_[static_cast<int>(f)]) {
                const std::size_t i = fn.idx;
                const double p1 = cv_.v[0][i], p3 = cv_.v[2][i], p4 = cv_.v[3][i],
                             p5 = cv_.v[4][i];
                const double e1 = -p1 - p4 + sp_ / 3.0;
                b.surface_topbottom +=
                    fn.w * wz * (a.alpha_z * e1 * e1 + a.gamma_z * (p3 * p3 + p5 * p5));
                if (want_grad) {
                    const double c1 = fn.w * wz * 2.0;
                    vbar_[0][i] += -c1 * a.alpha_z * e1;
                    vbar_[3][i] += -c1 * a.alpha_z * e1;
                    vbar_[2][i] += c1 * a.gamma_z * p3;
                    vbar_[4][i] += c1 * a.gamma_z * p5;
                }
            }
        }
    }

    // lateral walls
    const AnchoringConfig& a = prob_.anchoring;
    const double om[2] = {prob_.omega1(), prob_.omega2()};
    for (int axis = 0; axis < 2; ++axis) {
        if ((axis == 0 ? a.W1 : a.W2) <= 0.0) continue;
        const Face faces[2] = {axis == 0 ? Face::YMin : Face::XMin,
                               axis == 0 ? Face::YMax : Face::XMax};
        for (Face f : faces) {
            for (const FaceNode& fn : face_nodes_[static_cast<int>(f)]) {
                const std::size_t i = fn.idx;
                const double p1 = cv_.v[0][i], p2 = cv_.v[1][i], p3 = cv_.v[2][i],
                             p4 = cv_.v[3][i], p5 = cv_.v[4][i];
                if (a.lateral == LateralVariant::FullTarget) {
                    const double t1 = axis == 0 ? 2.0 * fn.g / 3.0 : -fn.g / 3.0;
                    const double t4 = axis == 0 ? -fn.g / 3.0 : 2.0 * fn.g / 3.0;
                    const double m1 = p1 - t1, m4 = p4 - t4;
                    b.surface_lateral += fn.w * om[axis] * 2.0 *
                        (m1 * m1 + m4 * m4 + m1 * m4 + p2 * p2 + p3 * p3 + p5 * p5);
                    if (want_grad) {
                        const double c1 = fn.w * om[axis] * 2.0;
                        vbar_[0][i] += c1 * (2.0 * m1 + m4);
                        vbar_[3][i] += c1 * (2.0 * m4 + m1);
                        vbar_[1][i] += c1 * 2.0 * p2;
                        vbar_[2][i] += c1 * 2.0 * p3;
                        vbar_[4][i] += c1 * 2.0 * p5;
                    }
                } else {
                    const double diag = axis == 0 ? p1 : p4;
                    const double e1 = diag - 2.0 * sp_ / 3.0;
                    const double offa = p2;
                    const double offb = axis == 0 ? p3 : p5;
                    b.surface_lateral +=
                        fn.w * om[axis] * (a.alpha * e1 * e1 + a.gamma * (offa * offa + offb * offb));
                    if (want_grad) {
                        const double c1 = fn.w * om[axis] * 2.0;
                        vbar_[axis == 0 ? 0 : 3][i] += c1 * a.alpha * e1;
                        vbar_[1][i] += c1 * a.gamma * offa;
                        vbar_[axis == 0 ? 2 : 4][i] += c1 * a.gamma * offb;
                    }
                }
            }
        }
    }

    b.total = b.elastic + b.bulk + b.surface_lateral + b.surface_topbottom;
    if (bd) *bd = b;

    if (want_grad) {
        grad->assign(coeffs.size(), 0.0);
        std::array<const double*, 5> vb, xb, yb, zb;
        for (int c = 0; c < 5; ++c) {
            vb[c] = vbar_[c].data();
            xb[c] = dxbar_[c].data();
            yb[c] = dybar_[c].data();
            zb[c] = dzbar_[c].data();
        }
        adjoint_accumulate(g, vb, xb, yb, zb, grad->data());
    }
    return b.total;
}

EnergyBreakdown total_energy(const SpectralField& f, const WellProblem& prob) {
    if (!f.grid || !f.grid->same_layout(*prob.grid))
        throw std::invalid_argument("total_energy: field and problem grids differ");
    EnergyModel model(prob);
    EnergyBreakdown bd;
    model.energy(f.coeffs, &bd);
    return bd;
}

std::vector<double> energy_gradient(const SpectralField& f, const WellProblem& prob) {
    if (!f.grid || !f.grid->same_layout(*prob.grid))
        throw std::invalid_argument("energy_gradient: field and problem grids differ");
    EnergyModel model(prob);
    std::vector<double> grad;
    model.energy_grad(f.coeffs, grad);
    return grad;
}

ElResidual el_residual(const SpectralField& f, const WellProblem& prob) {
    if (!f.grid || !f.grid->same_layout(*prob.grid))
        throw std::invalid_argument("el_residual: field and problem grids differ");
    const SpectralGrid& g = *prob.grid;
    CollocationValues cv = synthesize(f);
    std::array<std::vector<double>, 5> lap;
    synthesize_laplacian(f, lap);
    const double bf = prob.bulk_factor();
    const double sp = prob.s_plus();
    ElResidual r;

    // sample away from the boundary layers: the wall collars are only C^2 and
    // the corner columns carry genuine layers, where the pointwise residual
    // does not converge
    auto interior = [](const GridAxis& a, int i, double inset_lo, double inset_hi) {
        if (a.basis.kind == BasisKind::Fourier) return true;
        if (i <= 0 || i >= a.nq - 1) return false;
        return a.x[i] >= inset_lo && a.x[i] <= inset_hi;
    };
    for (int i = 0; i < g.ax.nq; ++i)
        for (int j = 0; j < g.ay.nq; ++j)
            for (int k = 0; k < g.az.nq; ++k) {
                if (!interior(g.ax, i, -0.8, 0.8) || !interior(g.ay, j, -0.8, 0.8) ||
                    !interior(g.az, k, 0.1 * g.eps, 0.9 * g.eps))
                    continue;
                const std::size_t idx = g.node_index(i, j, k);
                QTensor q;
                for (int c = 0; c < 5; ++c) q[c] = cv.v[c][idx];
                const QTensor h = bulk_gradient(q, prob.material);
                QTensor res;
                for (int c = 0; c < 5; ++c) res[c] = lap[c][idx] - bf * h[c];
                r.interior_sup = std::max(r.interior_sup, res.norm());
            }

    const double wz = prob.anchoring.Wz * prob.lambda_m() / prob.material.L_elastic;
    for (Face face : {Face::ZMin, Face::ZMax}) {
        const double nu = face == Face::ZMax ? 1.0 : -1.0;
        const int nfn = g.face_nodes(face);
        for (int m = 0; m < nfn; ++m) {
            const std::size_t idx = g.face_node_index(face, m);
            QTensor q, dq;
            for (int c = 0; c < 5; ++c) {
                q[c] = cv.v[c][idx];
                dq[c] = cv.dz[c][idx];
            }
            const QTensor gb = surface_g_matrix(q, sp, prob.anchoring.alpha_z,
                                                prob.anchoring.gamma_z);
            QTensor res;
            for (int c = 0; c < 5; ++c) res[c] = nu * dq[c] + wz * gb[c];
            r.boundary_sup = std::max(r.boundary_sup, res.norm());
        }
    }
    return r;
}

}
