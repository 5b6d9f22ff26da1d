#include "dimed/distributions.hpp"

#include <cmath>

#include "dimed/errors.hpp"
#include "dimed/normal.hpp"

namespace dimed {

namespace {

struct Validator {
    void operator()(const NormalDist& d) const {
        if (!std::isfinite(d.mu) || !std::isfinite(d.sigma) || !(d.sigma > 0.0)) {
            throw InvalidInput("Normal: sigma must be positive");
        }
    }
    void operator()(const LogNormalDist& d) const {
        if (!std::isfinite(d.mu) || !std::isfinite(d.sigma) || !(d.sigma > 0.0)) {
            throw InvalidInput("LogNormal: sigma must be positive");
        }
    }
    void operator()(const ExponentialDist& d) const {
        if (!std::isfinite(d.rate) || !(d.rate > 0.0)) {
            throw InvalidInput("Exponential: rate must be positive");
        }
    }
    void operator()(const UniformDist& d) const {
        if (!std::isfinite(d.a) || !std::isfinite(d.b) || !(d.a < d.b)) {
            throw InvalidInput("Uniform: requires a < b");
        }
    }
    void operator()(const BernoulliDist& d) const {
        if (!std::isfinite(d.q) || !(d.q > 0.0) || !(d.q < 1.0)) {
            throw InvalidInput("Bernoulli: q must lie strictly in (0,1)");
        }
    }
};

}  // namespace

void validate(const Superpopulation& dist) { std::visit(Validator{}, dist); }

std::string family_name(const Superpopulation& dist) {
    struct Namer {
        std::string operator()(const NormalDist&) const { return "normal"; }
        std::string operator()(const LogNormalDist&) const { return "lognormal"; }
        std::string operator()(const ExponentialDist&) const { return "exponential"; }
        std::string operator()(const UniformDist&) const { return "uniform"; }
        std::string operator()(const BernoulliDist&) const { return "bernoulli"; }
    };
    return std::visit(Namer{}, dist);
}

double true_quantile(const Superpopulation& dist, double p) {
    validate(dist);
    if (!(p > 0.0) || !(p < 1.0)) {
        throw InvalidInput("true_quantile: p must lie strictly in (0,1)");
    }
    struct Quantile {
        double p;
        double operator()(const NormalDist& d) const { return d.mu + d.sigma * normal_quantile(p); }
        double operator()(const LogNormalDist& d) const {
            return std::exp(d.mu + d.sigma * normal_quantile(p));
        }
        double operator()(const ExponentialDist& d) const { return -std::log1p(-p) / d.rate; }
        double operator()(const UniformDist& d) const { return d.a + p * (d.b - d.a); }
        double operator()(const BernoulliDist& d) const {
            if (p == 1.0 - d.q) {
                throw Unavailable(
                    "true_quantile: the p-quantile of Bernoulli(q) is non-unique when "
                    "p equals 1-q (every value in [0,1] qualifies); the quantile "
                    "function is discontinuous there");
            }
            return p < 1.0 - d.q ? 0.0 : 1.0;
        }
    };
    return std::visit(Quantile{p}, dist);
}

bool has_density(const Superpopulation& dist) {
    return !std::holds_alternative<BernoulliDist>(dist);
}

double density(const Superpopulation& dist, double x) {
    validate(dist);
    struct Density {
        double x;
        double operator()(const NormalDist& d) const {
            return normal_pdf((x - d.mu) / d.sigma) / d.sigma;
        }
        double operator()(const LogNormalDist& d) const {
            if (!(x > 0.0)) return 0.0;
            return normal_pdf((std::log(x) - d.mu) / d.sigma) / (x * d.sigma);
        }
        double operator()(const ExponentialDist& d) const {
            if (x < 0.0) return 0.0;
            return d.rate * std::exp(-d.rate * x);
        }
        double operator()(const UniformDist& d) const {
            return (x >= d.a && x <= d.b) ? 1.0 / (d.b - d.a) : 0.0;
        }
        double operator()(const BernoulliDist&) const {
            throw Unavailable("density: the Bernoulli family has no density");
        }
    };
    return std::visit(Density{x}, dist);
}

double draw(const Superpopulation& dist, double u) {
    struct Draw {
        double u;
        double operator()(const NormalDist& d) const { return d.mu + d.sigma * normal_quantile(u); }
        double operator()(const LogNormalDist& d) const {
            return std::exp(d.mu + d.sigma * normal_quantile(u));
        }
        double operator()(const ExponentialDist& d) const { return -std::log1p(-u) / d.rate; }
        double operator()(const UniformDist& d) const { return d.a + u * (d.b - d.a); }
        double operator()(const BernoulliDist& d) const { return u > 1.0 - d.q ? 1.0 : 0.0; }
    };
    return std::visit(Draw{u}, dist);
}

}  // namespace dimed
