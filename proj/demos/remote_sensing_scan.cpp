// Remote magnetometry through the teleportation channel: scans the bath
// Ohmicity of the second qubit and reports how much Fisher information about
// the field B1 survives to the receiving side, and when to measure.

#include <cstdio>

#include "tqsim/tqsim.hpp"

int main() {
    using namespace tqsim;

    const EnvironmentParams env1{1.0, 1.0, 1.0};
    const PureStateParams probe{std::numbers::pi / 2, 0.0, std::numbers::pi / 2};

    std::printf("%4s %10s %10s %10s %12s\n", "Q2", "best_t", "QFI(best)", "FI(best)",
                "QFI(t=1)");
    for (double q2 : {0.5, 1.0, 2.0, 3.0, 4.0}) {
        const EnvironmentParams env2{q2, 1.0, 1.0};
        double best_t = 0.0, best_qfi = 0.0, qfi_at_1 = 0.0, fi_best = 0.0;
        for (int i = 1; i <= 500; ++i) {
            const double t = 0.01 * i;
            const EstimationReport r = qfi_b1(t, env1, env2, probe);
            if (r.qfi > best_qfi) {
                best_qfi = r.qfi;
                best_t = t;
                fi_best = r.fi_optimal_povm;
            }
            if (i == 100) qfi_at_1 = r.qfi;
        }
        std::printf("%4.1f %10.3f %10.5f %10.5f %12.5f\n", q2, best_t, best_qfi, fi_best,
                    qfi_at_1);
    }

    const EstimationReport r = qfi_b1(1.0, env1, {2.0, 1.0, 1.0}, probe);
    std::printf("\nat t=1, Q2=2: alpha_eff %.6f, outcome probabilities", r.alpha_eff);
    for (double p : r.probs) std::printf(" %.5f", p);
    std::printf("\n");
    return 0;
}
