#ifndef TORVA_REPORT_HPP
#define TORVA_REPORT_HPP

#include <string>
#include <vector>

namespace torva {

/// Outcome of one machine-checked identity. A check passes only when it
/// compared at least one coefficient and found no mismatch; vacuous truth
/// is treated as an error by callers.
struct CheckReport {
    std::string identity;
    std::string anchor;     // which displayed identity this instantiates
    std::string scenario;   // fingerprint of algebra/automorphisms/caps
    long checked = 0;       // exact comparisons performed
    long skipped = 0;       // coefficients not visible at these caps
    bool truncated = false; // any window drop happened along the way
    struct Failure {
        std::string where;
        std::string lhs, rhs;
    };
    std::vector<Failure> failures;

    bool pass() const { return failures.empty() && checked > 0; }
    void note_failure(const std::string& where, const std::string& lhs, const std::string& rhs,
                      size_t cap = 64) {
        if (failures.size() < cap) failures.push_back({where, lhs, rhs});
    }
};

}  // namespace torva

#endif
