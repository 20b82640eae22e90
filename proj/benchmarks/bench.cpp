#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "ptspectra/hamiltonians.hpp"
#include "ptspectra/linalg.hpp"
#include "ptspectra/oscillator_basis.hpp"
#include "ptspectra/rspe.hpp"
#include "ptspectra/scan.hpp"

namespace {

using ptspectra::Complex;

void bm_eigenvalues_h3(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto h = ptspectra::build_h3(0.3, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ptspectra::eigenvalues(h.matrix));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_eigenvalues_h3)->Arg(32)->Arg(64)->Arg(128)->Arg(256)->Complexity();

void bm_build_h3(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(ptspectra::build_h3(-0.4, n));
    }
}
BENCHMARK(bm_build_h3)->Arg(64)->Arg(128)->Arg(256);

void bm_build_h2(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ptspectra::ModelH2 m{1.0, 1.4142135623730951, 1, 2};
    for (auto _ : state) {
        benchmark::DoNotOptimize(ptspectra::build_h2(m, 0.1, n, n));
    }
}
BENCHMARK(bm_build_h2)->Arg(16)->Arg(24)->Arg(32);

void bm_abs_power(benchmark::State& state) {
    const ptspectra::BasisSpec b{1.0, static_cast<std::size_t>(state.range(0))};
    for (auto _ : state) {
        benchmark::DoNotOptimize(ptspectra::abs_power_matrix(b, 2.4));
    }
}
BENCHMARK(bm_abs_power)->Arg(64)->Arg(128);

void bm_scan_gain(benchmark::State& state) {
    const ptspectra::GainCouplingFamily family(0.0, 2.0);
    ptspectra::ScanConfig cfg;
    cfg.track_count = 2;
    cfg.refine = false;
    for (int i = 0; i <= 40; ++i) {
        cfg.eps_grid.push_back(0.02 * i);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(ptspectra::scan(family, cfg));
    }
}
BENCHMARK(bm_scan_gain);

void bm_rspe_h2(benchmark::State& state) {
    const std::size_t n1 = 8;
    const std::size_t n2 = 8;
    std::vector<double> h0;
    h0.reserve(n1 * n2);
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
            h0.push_back((2.0 * static_cast<double>(i1) + 1.0) +
                         (2.0 * static_cast<double>(i2) + 1.0) * 1.4142135623730951);
        }
    }
    const ptspectra::DenseMatrix w =
        Complex(0.0, 1.0) * ptspectra::kron(ptspectra::monomial_matrix({1.0, n1}, 1),
                                            ptspectra::monomial_matrix({1.4142135623730951, n2}, 2));
    const auto order = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(ptspectra::rspe_matrix(h0, w, 0, order));
    }
}
BENCHMARK(bm_rspe_h2)->Arg(8)->Arg(16);

} // namespace

BENCHMARK_MAIN();
