#ifndef CYCSTEER_DOMAIN_HPP
#define CYCSTEER_DOMAIN_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cycsteer {

// Source = the labeled domain, target = the unlabeled domain the task must
// generalize to. The index doubles as the discriminator class id.
enum class Domain : uint8_t { source = 0, target = 1 };

inline int class_index(Domain d) { return static_cast<int>(d); }
inline Domain other(Domain d) { return d == Domain::source ? Domain::target : Domain::source; }

inline std::string to_string(Domain d) { return d == Domain::source ? "source" : "target"; }

inline Domain domain_from_string(const std::string& s) {
    if (s == "source") return Domain::source;
    if (s == "target") return Domain::target;
    throw std::invalid_argument("unknown domain: " + s);
}

}  // namespace cycsteer

#endif
