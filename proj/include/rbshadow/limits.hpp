#pragma once

#include <stdexcept>
#include <string>

namespace rbshadow {

// Size caps. Adjust before starting a run; the values are read, not locked.
struct Limits {
    int dense_superop_qubits = 5;  // 4^n x 4^n transfer matrices
    int dense_state_qubits = 8;    // d x d density matrices
    int enumeration_elements = 20000;
    int exact_qubits = 5;
};

inline Limits& limits() {
    static Limits l;
    return l;
}

// Raised when a request exceeds a cap. The CLI maps it to exit code 3.
class CapError : public std::length_error {
public:
    using std::length_error::length_error;
};

inline void require_cap(int n, int cap, const std::string& what) {
    if (n > cap) throw CapError(what + ": n=" + std::to_string(n) + " exceeds cap " + std::to_string(cap));
}

}  // namespace rbshadow
