#ifndef EHCAP_CHANNEL_HPP
#define EHCAP_CHANNEL_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ehcap {

// W = X + N with N ~ N(0, sigma2)
struct AwgnChannel {
    double sigma2 = 1.0;

    void validate() const {
        if (!(sigma2 > 0.0)) throw std::invalid_argument("channel: sigma2 must be > 0");
    }
    double sigma() const { return std::sqrt(sigma2); }
    // h(N) = 0.5 ln(2 pi e sigma2)
    double noise_entropy() const {
        return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * sigma2);
    }
};

inline double gaussian_pdf(double w, double sigma2) {
    return std::exp(-0.5 * w * w / sigma2) / std::sqrt(2.0 * std::numbers::pi * sigma2);
}

} // namespace ehcap

#endif
