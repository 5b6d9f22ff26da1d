#ifndef DIMED_DISTRIBUTIONS_HPP
#define DIMED_DISTRIBUTIONS_HPP

#include <string>
#include <variant>

namespace dimed {

// Superpopulation families available to the simulator. Bernoulli is the
// odd one out: it has no density, and its p-quantile is non-unique when
// p equals the mass at zero. It exists so that studies can demonstrate
// what breaks without a continuous quantile function.
struct NormalDist {
    double mu = 0.0;
    double sigma = 1.0;
};
struct LogNormalDist {
    double mu = 0.0;
    double sigma = 1.0;
};
struct ExponentialDist {
    double rate = 1.0;
};
struct UniformDist {
    double a = 0.0;
    double b = 1.0;
};
struct BernoulliDist {
    double q = 0.5;
};

using Superpopulation =
    std::variant<NormalDist, LogNormalDist, ExponentialDist, UniformDist, BernoulliDist>;

void validate(const Superpopulation& dist);
std::string family_name(const Superpopulation& dist);

// The p-quantile of the superpopulation. Throws Unavailable when the
// quantile is non-unique (Bernoulli with p equal to the mass at zero).
double true_quantile(const Superpopulation& dist, double p);

bool has_density(const Superpopulation& dist);

// Density at x; throws Unavailable for families without one.
double density(const Superpopulation& dist, double x);

// Inverse-CDF draw from a uniform u in (0,1). Keeping the transform
// explicit makes every stream reproducible bit-for-bit regardless of the
// standard library's distribution implementations.
double draw(const Superpopulation& dist, double u);

}  // namespace dimed

#endif  // DIMED_DISTRIBUTIONS_HPP
