#pragma once

#include <stdexcept>
#include <string>

namespace ptspectra {

// Numerical failure: an iteration or refinement loop exhausted its budget
// (QR iteration cap, quadrature stabilization cap, truncation non-convergence,
// trajectory-matching ambiguity). Callers that orchestrate runs map this to a
// "numerical failure" outcome, distinct from invalid input
// (std::invalid_argument).
class NonConvergence : public std::runtime_error {
public:
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ptspectra
