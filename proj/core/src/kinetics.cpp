#include "poresim/kinetics.hpp"

#include "poresim/errors.hpp"

namespace poresim {

void BioParams::validate() const {
    if (growth_rate_max < 0 || mortality_rate < 0 || respiration_rate < 0 ||
        som_decay_rate < 0 || fom_decay_rate < 0 || d_dom < 0 || d_mb < 0 || d_co2 < 0)
        throw InputError("BioParams: rates must be nonnegative");
    if (recycled_fraction < 0.0 || recycled_fraction > 1.0)
        throw InputError("BioParams: recycled_fraction must lie in [0,1]");
    if (!(half_saturation > 0.0))
        throw InputError("BioParams: half_saturation must be positive");
}

double monod(double dom_mass, const BioParams& p) {
    return p.growth_rate_max * dom_mass / (p.half_saturation + dom_mass);
}

double monod_derivative(double dom_mass, const BioParams& p) {
    const double denom = p.half_saturation + dom_mass;
    return p.growth_rate_max * p.half_saturation / (denom * denom);
}

NodeVec reaction_rhs(const NodeVec& s, const BioParams& p) {
    const double b = s[kMb], m1 = s[kSom], m2 = s[kFom];
    const double uptake = monod(s[kDom], p) * b;
    const double death = p.mortality_rate * b;
    const double respiration = p.respiration_rate * b;
    const double som_out = p.som_decay_rate * m1;
    const double fom_out = p.fom_decay_rate * m2;

    NodeVec f;
    f[kMb] = uptake - death - respiration;
    f[kDom] = p.recycled_fraction * death - uptake + som_out + fom_out;
    f[kSom] = (1.0 - p.recycled_fraction) * death - som_out;
    f[kFom] = -fom_out;
    f[kCo2] = respiration;
    return f;
}

NodeMat reaction_jacobian(const NodeVec& s, const BioParams& p) {
    const double b = s[kMb];
    const double g = monod(s[kDom], p);
    const double gp = monod_derivative(s[kDom], p);
    const double mu = p.mortality_rate, eta = p.respiration_rate;
    const double rho = p.recycled_fraction;

    NodeMat j = NodeMat::Zero();
    j(kMb, kMb) = g - (mu + eta);
    j(kMb, kDom) = gp * b;
    j(kDom, kMb) = rho * mu - g;
    j(kDom, kDom) = -gp * b;
    j(kDom, kSom) = p.som_decay_rate;
    j(kDom, kFom) = p.fom_decay_rate;
    j(kSom, kMb) = (1.0 - rho) * mu;
    j(kSom, kSom) = -p.som_decay_rate;
    j(kFom, kFom) = -p.fom_decay_rate;
    j(kCo2, kMb) = eta;
    return j;
}

} // namespace poresim
