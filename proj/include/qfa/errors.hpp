#pragma once

#include <stdexcept>
#include <string>

namespace qfa {

/// Base of every error thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define QFA_DEFINE_ERROR(name)               \
    class name : public error {              \
    public:                                  \
        using error::error;                  \
    }

// polyrat
QFA_DEFINE_ERROR(pole_at_point);
QFA_DEFINE_ERROR(division_by_zero_rational);
QFA_DEFINE_ERROR(degenerate_quadratic);

// network
QFA_DEFINE_ERROR(singular_closure);
QFA_DEFINE_ERROR(invalid_parameter);

// sensitivity
QFA_DEFINE_ERROR(singular_loop);
QFA_DEFINE_ERROR(zero_gain);
QFA_DEFINE_ERROR(no_solution);

// analysis
QFA_DEFINE_ERROR(refinement_budget_exceeded);
QFA_DEFINE_ERROR(no_phase_crossover);

// cli
QFA_DEFINE_ERROR(config_error);
QFA_DEFINE_ERROR(tolerance_exceeded);

#undef QFA_DEFINE_ERROR

}  // namespace qfa
