#ifndef PORESIM_KINETICS_HPP
#define PORESIM_KINETICS_HPP

#include <Eigen/Dense>

namespace poresim {

/// One node's five compound masses in ugC, ordered (MB, DOM, SOM, FOM, CO2).
using NodeVec = Eigen::Matrix<double, 5, 1>;
using NodeMat = Eigen::Matrix<double, 5, 5>;

inline constexpr int kMb = 0;
inline constexpr int kDom = 1;
inline constexpr int kSom = 2;
inline constexpr int kFom = 3;
inline constexpr int kCo2 = 4;

/// Kinetic constants. Rates in day^-1, half_saturation in the same mass unit
/// as node DOM (ugC): the Monod term is applied to node masses, so a user who
/// means a true concentration must convert by the node volume. Diffusion
/// coefficients in um^2/day; only DOM diffuses in the network model, the MB
/// and CO2 coefficients exist for the continuum grid solver.
struct BioParams {
    double growth_rate_max = 9.6;     // maximal MB growth rate
    double half_saturation = 0.001;   // DOM mass at half-maximal growth
    double mortality_rate = 0.5;
    double respiration_rate = 0.2;
    double recycled_fraction = 0.55;  // share of dead MB that returns to DOM
    double som_decay_rate = 0.01;
    double fom_decay_rate = 0.3;
    double d_dom = 0.0;               // no literature default; must be configured
    double d_mb = 0.0;
    double d_co2 = 0.0;

    /// Throws InputError when a rate is negative, the recycled fraction is
    /// outside [0,1], or the half saturation is not positive.
    void validate() const;
};

/// Monod growth factor K*n / (K_b + n); nondecreasing in n, bounded by K.
double monod(double dom_mass, const BioParams& p);

/// d(monod)/dn = K*K_b / (K_b + n)^2.
double monod_derivative(double dom_mass, const BioParams& p);

/// Reaction rates (ugC/day) for one node:
///   d(MB)  = monod(n)*b - (eta + mu)*b
///   d(DOM) = rho*mu*b - monod(n)*b + c1*m1 + c2*m2
///   d(SOM) = -c1*m1 + (1 - rho)*mu*b
///   d(FOM) = -c2*m2
///   d(CO2) = eta*b
/// The five components sum to zero: the reaction only moves carbon between
/// pools. Shared products are computed once so the cancellation is exact.
NodeVec reaction_rhs(const NodeVec& s, const BioParams& p);

/// Exact Jacobian of reaction_rhs. Columns sum to zero (the conservation
/// identity differentiated).
NodeMat reaction_jacobian(const NodeVec& s, const BioParams& p);

} // namespace poresim

#endif
