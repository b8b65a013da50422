// OpenMP kernels against their serial references.  On a single core the
// two should be close; the gap shows the threading overhead.
#include "sepam/exact.hpp"
#include "sepam/fields.hpp"
#include "sepam/montecarlo.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace sepam;

namespace {

const SparseOperator& joint(int L)
{
    static std::map<int, SparseOperator> cache;
    auto it = cache.find(L);
    if (it == cache.end()) {
        OperatorSpec s;
        s.torus = Torus(1, L);
        s.kappa = 1.0;
        s.p = 1;
        it = cache.emplace(L, build_joint_generator(s)).first;
    }
    return it->second;
}

void csr_apply(benchmark::State& st, bool parallel)
{
    const auto& op = joint(static_cast<int>(st.range(0)));
    std::vector<double> x(op.size(), 1.0), y(op.size());
    for (auto _ : st) {
        if (parallel)
            op.matrix.apply(x, y);
        else
            op.matrix.apply_serial(x, y);
        benchmark::DoNotOptimize(y.data());
    }
    st.SetItemsProcessed(st.iterations() * op.matrix.nnz());
}

void mc_moment(benchmark::State& st, bool parallel)
{
    MomentParams m;
    m.torus = Torus(1, 16);
    m.kappa = 1.0;
    m.parallel = parallel;
    for (auto _ : st) benchmark::DoNotOptimize(estimate_moment(m, 4.0, static_cast<std::uint64_t>(st.range(0)), 1).mean);
}

void koff_window(benchmark::State& st)
{
    auto k = k_kernels(PsiSpec{3, 2.0, 1.0, 0.5});
    for (auto _ : st) benchmark::DoNotOptimize(k.koff_l1_window(static_cast<int>(st.range(0))));
}

} // namespace

BENCHMARK_CAPTURE(csr_apply, omp, true)->Arg(10)->Arg(14);
BENCHMARK_CAPTURE(csr_apply, serial, false)->Arg(10)->Arg(14);
BENCHMARK_CAPTURE(mc_moment, omp, true)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(mc_moment, serial, false)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(koff_window)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
