#pragma once

#include <stdexcept>
#include <string>

namespace picl {

// Bad user input: malformed config, invalid flag combinations, out-of-range options.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unusable data or weights: missing files, malformed containers, shape/label mismatches.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal failures at run time (I/O mid-run, arithmetic preconditions broken).
struct runtime_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A prompt that cannot fit the model context. Carries sizes so callers can
// decide between erroring (single prediction) and skip-and-report (harness).
struct context_overflow : runtime_failure {
    context_overflow(std::size_t required_, std::size_t available_)
        : runtime_failure("prompt requires " + std::to_string(required_) +
                          " tokens but the model context is " + std::to_string(available_)),
          required(required_), available(available_) {}
    std::size_t required;
    std::size_t available;
};

}  // namespace picl
