#ifndef RHODICH_CSV_HPP
#define RHODICH_CSV_HPP

#include <string>
#include <vector>

#include "rhodich/family.hpp"
#include "rhodich/funcspaces.hpp"

namespace rhodich {

// CSV schemas:
//   sampled functions: header t,x1,...,xd
//   subspace bases:    header b1,...,bk (one row per coordinate)
//   matrix families:   header t,a11,a12,...,add (row-major entries)
//   rate densities:    header t,mu

SampledFunction read_sampled_function(const std::string& path);
void write_sampled_function(const std::string& path, const SampledFunction& f);

SubspaceZ read_subspace(const std::string& path);
void write_subspace(const std::string& path, const SubspaceZ& Z);

// Linearly interpolated A(t) from sampled entries, wrapped as an ODE family.
EvolutionFamily read_ode_family(const std::string& path, double tol);

// columns t,mu for a mu_integral rate
std::pair<std::vector<double>, std::vector<double>> read_mu_samples(
    const std::string& path);

}  // namespace rhodich

#endif
