#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <vector>

#include "peg/kernels.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto start = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto end = Clock::now();
    return std::chrono::duration<double, std::milli>(end - start).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 10;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> norm(0.0, 1.0);

    std::cout << "size      serial_ms    omp_ms       speedup  max_abs_diff\n";
    for (int n : {32, 64, 128, 256, 512}) {
        std::vector<double> a(static_cast<size_t>(n) * n), b(a), c1(a.size()), c2(a.size());
        for (auto& x : a) x = norm(rng);
        for (auto& x : b) x = norm(rng);

        const double t_serial = time_ms(
            [&] { peg::kernels::gemm_serial(false, false, n, n, n, a.data(), b.data(), c1.data(), false); },
            reps);
        const double t_omp = time_ms(
            [&] { peg::kernels::gemm_omp(false, false, n, n, n, a.data(), b.data(), c2.data(), false); },
            reps);

        double max_diff = 0.0;
        for (size_t i = 0; i < c1.size(); ++i)
            max_diff = std::max(max_diff, std::abs(c1[i] - c2[i]));

        std::printf("%-9d %-12.4f %-12.4f %-8.2f %g\n", n, t_serial, t_omp,
                    t_serial / t_omp, max_diff);
    }
    return 0;
}
