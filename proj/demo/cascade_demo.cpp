// Compares the two feedback topologies for one nominal configuration.

#include <cmath>
#include <cstdio>

#include "qfa/qfa.hpp"

int main() {
    const qfa::center_case cc{0.90, 0.2, 2};
    const qfa::sensitivity_report r = qfa::verify_main_theorem(cc);
    std::printf("N=%d x=%.2f beta_A=%.2f\n", cc.n, cc.x, cc.beta_a);
    std::printf("  uncontrolled M1      %8.3f dB\n", 20.0 * std::log10(std::abs(r.m1)));
    std::printf("  closed-loop gain     %8.3f dB (both topologies)\n", r.gain_db);
    std::printf("  calibrated beta_B    %8.4f\n", r.beta_b);
    std::printf("  S_A / S_B            %8.4f / %.4f (ratio %.4f)\n", r.S_A, r.S_B, r.ratio);

    const auto loop = qfa::open_loop_type_b(cc.amp(), cc.n, r.beta_b);
    const auto ny = qfa::nyquist(loop, qfa::frequency_grid{});
    std::printf("  type-B encirclements %8d, gain margin %.4f dB at %.4g rad/s\n", ny.encirclements,
                ny.gain_margin_db, ny.omega_pc);
    return 0;
}
