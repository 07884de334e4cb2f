#ifndef QWELL_IO_HPP
#define QWELL_IO_HPP

#include "qwell/problem.hpp"
#include "qwell/reduced2d.hpp"

#include <cstdint>
#include <string>

namespace qwell {

// Legacy-VTK ASCII structured grid with point data: beta2 (scalar), director
// (unit 3-vector), q3 (axis-frame scalar) and Q (6-component symmetric
// tensor, order Q11 Q12 Q13 Q22 Q23 Q33 as a FIELD array). The sampling
// lattice is nx x nx x max(8, round(16 eps)).
void export_vtk(const SpectralField& f, const WellProblem& prob, const std::string& path,
                std::uint64_t config_hash, int nx = 64);

// Cross-section CSV at height z: x,y,beta2,nx,ny,nz,q3 on an nx x nx lattice.
void export_slice_csv(const SpectralField& f, const WellProblem& prob, double z,
                      const std::string& path, std::uint64_t config_hash, int nx = 64);

// Reduced-state dump: x,y,q1,q2,q3,beta2 at every non-exterior node.
void export_reduced_csv(const ReducedState& s, const std::string& path,
                        std::uint64_t config_hash);

}

#endif
