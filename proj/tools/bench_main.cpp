#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cfaudit/audit.hpp"
#include "cfaudit/learn.hpp"
#include "cfaudit/parallel.hpp"
#include "cfaudit/prep.hpp"
#include "cfaudit/synth.hpp"

using namespace cfaudit;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double time_ms(F&& f, int reps = 3) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_ms();
        f();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

void row(const char* name, double serial_ms, double parallel_ms, bool ok) {
    std::printf("%-34s %10.1f ms %10.1f ms %7.2fx   %s\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, ok ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n_patients = 20000;
    if (argc > 1) n_patients = static_cast<std::size_t>(std::atoll(argv[1]));
    const int hw_threads = max_threads();
    std::printf("threads: 1 vs %d, %zu patients\n", hw_threads, n_patients);
    std::printf("%-34s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    SynthConfig scfg = SynthConfig::defaults();
    scfg.n_patients = n_patients;

    // cohort generation: canonical ordering makes the output thread-count
    // independent; compare content hashes
    CohortTable serial_table, parallel_table;
    const double gen_serial = time_ms([&] {
        set_threads(1);
        serial_table = generate_cohort(scfg);
    });
    const double gen_parallel = time_ms([&] {
        set_threads(hw_threads);
        parallel_table = generate_cohort(scfg);
    });
    row("synth: generate_cohort", gen_serial, gen_parallel,
        cohort_content_hash(serial_table) == cohort_content_hash(parallel_table));

    const CohortTable& table = parallel_table;
    const FeatureSchema schema = FeatureSchema::defaults();
    const FeatureMatrix matrix = build_feature_matrix(table, schema, Arm::ControlSao2);
    const TaskLabel labels = make_labels(table, Task::Mortality);
    std::vector<std::size_t> all_rows(matrix.n_rows);
    for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
    const Dataset data = gather(matrix, labels, all_rows);
    const std::size_t n = data.n_rows, d = data.n_cols;

    // logistic loss+gradient kernel: production chunked reduction vs the
    // plain serial reference
    {
        std::vector<double> w(d, 0.01), margins(n), grad_ref(d + 1), grad_par(d + 1);
        kernels::linear_margins(data.x.data(), n, d, w.data(), -1.0, margins.data());
        const double t_ref = time_ms([&] {
            reference::logistic_grad(data.x.data(), margins.data(), data.y.data(), n, d, w.data(),
                                     1.0, grad_ref.data());
        }, 10);
        set_threads(hw_threads);
        const double t_par = time_ms([&] {
            kernels::logistic_grad(data.x.data(), margins.data(), data.y.data(), n, d, w.data(),
                                   1.0, grad_par.data());
        }, 10);
        double max_rel = 0.0;
        for (std::size_t j = 0; j <= d; ++j)
            max_rel = std::max(max_rel, std::fabs(grad_ref[j] - grad_par[j]) /
                                            std::max(1e-300, std::fabs(grad_ref[j])));
        row("learn: logistic gradient kernel", t_ref, t_par, max_rel < 1e-10);
    }

    // full trainings: identical results required for any thread count
    {
        LinearModel m1, m2;
        const double t1 = time_ms([&] {
            set_threads(1);
            m1 = train_logistic(data);
        }, 1);
        const double t2 = time_ms([&] {
            set_threads(hw_threads);
            m2 = train_logistic(data);
        }, 1);
        row("learn: train_logistic", t1, t2, model_to_json(m1) == model_to_json(m2));
    }
    {
        TreeEnsemble m1, m2;
        const double t1 = time_ms([&] {
            set_threads(1);
            m1 = train_gbt(data);
        }, 1);
        const double t2 = time_ms([&] {
            set_threads(hw_threads);
            m2 = train_gbt(data);
        }, 1);
        row("learn: train_gbt", t1, t2, model_to_json(m1) == model_to_json(m2));
    }

    set_threads(hw_threads);
    return 0;
}
