#ifndef QWELL_ENERGY_HPP
#define QWELL_ENERGY_HPP

#include "qwell/problem.hpp"

#include <vector>

// Total rescaled free energy
//   F = int_V ( 1/2 |grad Q|^2 + (lambda_bar^2 / 2C) f_b(Q) ) dV
//     + sum_faces (surface densities)
// and its exact gradient with respect to the flattened coefficient vector.

namespace qwell {

// Reusable evaluator; owns scratch buffers, safe to use from one thread at a
// time. Distinct instances may run concurrently.
class EnergyModel {
public:
    explicit EnergyModel(const WellProblem& prob);

    const WellProblem& problem() const { return prob_; }
    int dof() const { return prob_.grid->dof_total(); }

    double energy(const std::vector<double>& coeffs, EnergyBreakdown* bd = nullptr);
    // grad is resized and overwritten.
    double energy_grad(const std::vector<double>& coeffs, std::vector<double>& grad,
                       EnergyBreakdown* bd = nullptr);

private:
    double evaluate(const std::vector<double>& coeffs, std::vector<double>* grad,
                    EnergyBreakdown* bd);

    WellProblem prob_;
    double sp_;
    struct FaceNode {
        std::size_t idx;   // volume node
        double w;          // face quadrature weight
        double g;          // wall profile value (lateral faces)
    };
    std::vector<FaceNode> face_nodes_[6];
    std::vector<double> w3d_;
    CollocationValues cv_;
    std::array<std::vector<double>, 5> vbar_, dxbar_, dybar_, dzbar_;
};

EnergyBreakdown total_energy(const SpectralField& f, const WellProblem& prob);
std::vector<double> energy_gradient(const SpectralField& f, const WellProblem& prob);

struct ElResidual {
    // sup_nodes |Lap Q - (lb^2/2C) dfb(Q)|_F over interior nodes away from
    // the wall collars (|x|,|y| <= 0.8, 0.1 eps <= z <= 0.9 eps)
    double interior_sup = 0.0;
    double boundary_sup = 0.0;  // sup over top/bottom nodes |d_nu Q + w_z G(Q)|_F
};
ElResidual el_residual(const SpectralField& f, const WellProblem& prob);

// Weak-anchoring boundary operator on the top/bottom plates; symmetric and
// traceless by construction.
QTensor surface_g_matrix(const QTensor& q, double s_plus, double alpha_z, double gamma_z);

// One lateral-wall surface energy density at a point. axis = 0 selects the
// x-preferred walls (y = +-1), axis = 1 the y-preferred walls (x = +-1).
double lateral_density(const QTensor& q, double g, int axis, const AnchoringConfig& a,
                       double omega, double s_plus);

// Top/bottom surface energy density.
double plate_density(const QTensor& q, const AnchoringConfig& a, double wz, double s_plus);

}

#endif
