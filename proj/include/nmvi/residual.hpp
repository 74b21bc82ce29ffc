#pragma once

// Natural map v - P_K[v - F(v)] and the residual-based solution test.

#include "nmvi/problem.hpp"

namespace nmvi {

inline constexpr double kDefaultSolutionTol = 1e-8;

struct ResidualReport {
    Vector point;
    Vector natural_map_value;
    double residual_norm = 0.0;
    bool is_solution_at_tol = false;
    double tol = 0.0;
};

/// Zero exactly at the solutions of the VI. Defined for every v, in K or not.
inline Vector natural_map(const VIProblem& problem, const Vector& v) {
    require_dim(v.size(), problem.dim(), "natural_map");
    return v - problem.set().project(v - eval_mapping(problem.mapping(), v));
}

inline double natural_residual(const VIProblem& problem, const Vector& v) {
    return natural_map(problem, v).norm();
}

inline ResidualReport is_solution(const VIProblem& problem, const Vector& v,
                                  double tol = kDefaultSolutionTol) {
    if (!(tol >= 0.0)) {
        throw ValidationError("is_solution: tolerance must be nonnegative");
    }
    ResidualReport r;
    r.point = v;
    r.natural_map_value = natural_map(problem, v);
    r.residual_norm = r.natural_map_value.norm();
    r.tol = tol;
    r.is_solution_at_tol = r.residual_norm <= tol;
    return r;
}

} // namespace nmvi
