// spin_model.hpp — two-level system coupled to two-level chain elements
//
// h_S = diag(0, S), h_E = diag(0, E), and the interaction is fixed by a 2x2
// matrix B = [[a, b], [c, d]]: b drives the exchange |01><10| (detuning E - S),
// c the pair creation |00><11| (detuning E + S), a and d the one-sided flips.

#pragma once

#include <string>
#include <vector>

#include "risim/dynamics.hpp"

namespace risim {

struct SpinParams {
    double S = 1.0;
    double E = 2.0;
    double beta = 1.0;
    Complex a{0.0, 0.0};
    Complex b{1.0, 0.0};
    Complex c{1.0, 0.0};
    Complex d{0.0, 0.0};
    double tau = 1.0;

    double coupling_weight() const { return std::norm(b) + std::norm(c); } // |b|^2 + |c|^2
};

// Throws InputError on non-finite values, beta < 0 or tau <= 0.
void validate(const SpinParams& p);

// p0 = |0><0| is attached when a = d = 0.
RISModel build_spin_model(const SpinParams& p);

// (1 - cos(tau x)) / x^2, with the value tau^2 / 2 at x = 0.
double resonance_kernel(double x, double tau);

struct SpinDeltas {
    double delta0;
    double delta1;
};

SpinDeltas closed_form_deltas(const SpinParams& p);

struct OffDiagonalCheck {
    double tau;
    double re_u01;  // Re <u01|gen|u01>
    double re_u10;  // Re <u10|gen|u10>
    double bound;   // -(tau^2/2)(|b|^2 + |c|^2)
    double slack;   // 10 tau^3 ||B||^2
    bool holds;
};

struct SpinGeneratorReport {
    SpinDeltas closed_form;
    double pipeline_delta0; // <u00|gen|u00>
    double pipeline_delta1; // <u11|gen|u11>
    double block_residual;  // largest entry coupling {u00,u11} with {u01,u10}
    double diagonal_block_residual; // vs ((d0, -d0), (-d1, d1))
    double row_sum_residual; // || gen(1) ||
    std::vector<OffDiagonalCheck> off_diagonal; // tau in {0.1, 0.05}
    bool diagonal_oracle_applicable; // a = d = 0
};

SpinGeneratorReport closed_form_generator_checks(const SpinParams& p);

// diag(delta1, delta0) / (delta0 + delta1). Throws NoAsymptoticStateError when
// |b|^2 + |c|^2 = 0 or delta0 + delta1 = 0, InputError when S = 0.
ComplexMatrix spin_asymptotic_state(const SpinParams& p);

} // namespace risim
