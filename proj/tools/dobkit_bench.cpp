// Compares the OpenMP kernels against the serial reference on the hot
// paths: frequency sweeps, the bandwidth sweep and adaptive quadrature.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "dobkit/constraint_solver.hpp"
#include "dobkit/parallel.hpp"

using namespace dobkit;
using clock_type = std::chrono::steady_clock;

namespace {

PlantModel bench_plant() {
    PlantModel p;
    p.nominal = RationalTF(Polynomial{5.0, 1.0}, Polynomial{6.0, 5.0, 1.0});
    p.weight = UncertaintyWeight{100.0, 0.2, 5.0};
    p.delta = DeltaInterval{-0.19999999, 1.0};
    return p;
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = clock_type::now();
        fn();
        const auto t1 = clock_type::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

double bench_freq_response() {
    const PlantModel plant = bench_plant();
    const DobFilter dob = make_lpf(3, 100.0);
    const LoopSet loop = inner_loop(plant, dob, 0.5);
    const std::vector<double> grid = logspace(1e-3, 1e6, 200000);
    double sink = 0.0;
    const double t = time_best_of(3, [&] {
        const ComplexResponse r = freq_response(loop.S, grid);
        sink += std::abs(r.values.back());
    });
    (void)sink;
    return t;
}

double bench_sweep() {
    const PlantModel plant = bench_plant();
    DesignSpec spec;
    spec.alpha = 0.1;
    spec.sup_logS = 1.4142135623730951;
    spec.delta = 0.4;
    spec.w_gamma = 100.0;
    spec.w_beta = 15.0;
    const std::vector<double> grid = logspace(5.0, 500.0, 36);
    const double t = time_best_of(2, [&] {
        (void)sweep_admissible_bandwidth(plant, 2, spec, Backend::exact, grid);
    });
    return t;
}

double bench_quadrature() {
    const PlantModel plant = bench_plant();
    const DobFilter dob = make_lpf(2, 50.0);
    const LoopSet loop = inner_loop(plant, dob, 0.0);
    const TailBound tail = lemma2_tail(0.0, 1, 1e4, 0.25);
    const double t = time_best_of(3, [&] { (void)bode_integral(loop, 1e4, tail); });
    return t;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-16s serial %8.4f s   openmp %8.4f s   speedup %.2fx\n", name, serial, parallel,
                parallel > 0.0 ? serial / parallel : 0.0);
}

}  // namespace

int main() {
    std::printf("threads available: %d\n", [] {
        par::set_enabled(true);
        return par::max_threads();
    }());

    par::set_enabled(false);
    const double fr_s = bench_freq_response();
    const double sw_s = bench_sweep();
    const double gk_s = bench_quadrature();

    par::set_enabled(true);
    const double fr_p = bench_freq_response();
    const double sw_p = bench_sweep();
    const double gk_p = bench_quadrature();

    report("freq_response", fr_s, fr_p);
    report("bandwidth_sweep", sw_s, sw_p);
    report("quadrature", gk_s, gk_p);
    return 0;
}
