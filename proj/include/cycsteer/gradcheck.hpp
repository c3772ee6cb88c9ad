#ifndef CYCSTEER_GRADCHECK_HPP
#define CYCSTEER_GRADCHECK_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cycsteer/network.hpp"

namespace cycsteer {

// Scalar objectives whose reverse-mode gradients get verified against
// central finite differences.
enum class LossSelector : uint8_t {
    steering,
    discriminator,
    generator_flipped,
    generator_saturating,
    reconstruction,
    semantic,
    combined,
};

std::string to_string(LossSelector s);
LossSelector loss_selector_from_string(const std::string& s);

struct GradCheckEntry {
    std::string entry;  // "<net>/<param>"
    double max_rel_err = 0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;  // sorted worst-first
    double worst = 0;
    std::string worst_entry;
    double tolerance = 0;
    bool passed = false;
};

using ParamMap = std::map<std::string, ParameterSet<double>>;
using GradMap = std::map<std::string, GradientSet<double>>;

// Core comparison: central finite differences of `loss_value` (which must be
// a pure function of `params`) against the supplied analytic gradients, one
// relative error per parameter entry. Running-statistics entries are skipped.
GradCheckReport compare_gradients(ParamMap& params, const std::function<double()>& loss_value,
                                  const GradMap& analytic, double epsilon, double tolerance);

// Table-1 stack shrunk to gradient-check scale (channels divided, small
// spatial size), float64.
NetworkSpec miniature_spec(Role role, Activation act = Activation::leaky_relu, int height = 8,
                           int width = 16, int divisor = 8);

// Builds the miniature scenario for `loss` around `subject` (auxiliary
// networks are derived from the subject's input size), evaluates the
// reverse-mode gradients of every participating parameter entry, and checks
// them against central finite differences.
GradCheckReport gradient_check(const NetworkSpec& subject, LossSelector loss,
                               double epsilon = 1e-5, double tolerance = 1e-4,
                               uint64_t seed = 42);

}  // namespace cycsteer

#endif
