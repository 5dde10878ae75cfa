#include <algorithm>
#include <atomic>
#include <exception>
#include <iterator>
#include <sstream>
#include <thread>

#include "osc/format.hpp"
#include "osc/trainer.hpp"

namespace osc {

namespace {

ExperimentRow run_one(const ExperimentSpec& spec, LossKind loss, std::uint64_t seed) {
    SynthSpec dataset = spec.dataset;
    dataset.seed = seed;
    const auto sample = synth_generate(dataset);

    FitConfig fit = spec.fit;
    fit.loss_kind = loss;
    fit.seed = seed;
    const auto trace = fit_logits(spec.use_image ? &sample.image : nullptr, sample.noisy, fit);

    ExperimentRow row;
    row.loss = loss;
    row.seed = seed;
    row.metrics = macro_average(evaluate_classes(argmax(trace.final_probs), sample.truth));
    row.steps = fit.steps;
    row.final_loss = trace.entries.back().loss_total;
    return row;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec, std::size_t workers) {
    spec.dataset.validate();
    spec.fit.validate();

    struct Job {
        LossKind loss;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (auto loss : spec.losses) {
        for (auto seed : spec.seeds) jobs.push_back({loss, seed});
    }

    ExperimentReport report;
    report.rows.resize(jobs.size());
    std::vector<std::exception_ptr> failures(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                report.rows[j] = run_one(spec, jobs[j].loss, jobs[j].seed);
            } catch (...) {
                failures[j] = std::current_exception();
            }
        }
    };

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(jobs.size(), 1));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
        work();
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return report;
}

std::string ExperimentReport::to_csv() const {
    std::string out = std::string(kExperimentCsvHeader) + "\n";
    for (const auto& r : rows) {
        out += std::string(to_string(r.loss)) + "," + std::to_string(r.seed) + "," + format_real(r.metrics.dsc) +
               "," + format_real(r.metrics.jac) + "," + format_real(r.metrics.pre) + "," +
               format_real(r.metrics.rec) + "," + format_real(r.metrics.hau95) + "," + std::to_string(r.steps) +
               "," + format_real(r.final_loss) + "\n";
    }
    return out;
}

std::vector<LossSummary> ExperimentReport::summarize() const {
    std::vector<LossSummary> out;
    for (const auto& r : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const LossSummary& s) { return s.loss == r.loss; });
        if (it == out.end()) {
            out.push_back({r.loss, 0, 0.0, 0.0});
            it = std::prev(out.end());
        }
        ++it->runs;
        it->mean_dsc += r.metrics.dsc;
        it->mean_hau95 += r.metrics.hau95;
    }
    for (auto& s : out) {
        s.mean_dsc /= static_cast<double>(s.runs);
        s.mean_hau95 /= static_cast<double>(s.runs);
    }
    return out;
}

std::string ExperimentReport::summary_text() const {
    const auto summary = summarize();
    std::ostringstream out;
    out << "runs: " << rows.size() << "\n";
    const LossSummary* bce = nullptr;
    const LossSummary* osc = nullptr;
    for (const auto& s : summary) {
        out << "mean_dsc " << to_string(s.loss) << " " << format_real(s.mean_dsc) << " (hau95 "
            << format_real(s.mean_hau95) << ", " << s.runs << " runs)\n";
        if (s.loss == LossKind::Bce) bce = &s;
        if (s.loss == LossKind::Osc) osc = &s;
    }
    if (bce != nullptr && osc != nullptr) {
        out << "osc_mean_dsc_exceeds_bce: " << (osc->mean_dsc > bce->mean_dsc ? "yes" : "no") << "\n";
    }
    return out.str();
}

std::vector<ExperimentRow> parse_experiment_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || split_csv(line) != split_csv(kExperimentCsvHeader)) {
        throw Error(ErrorKind::InvalidArgument, "experiment CSV header mismatch");
    }
    std::vector<ExperimentRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 9) throw Error(ErrorKind::InvalidArgument, "experiment row needs 9 fields");
        ExperimentRow r;
        r.loss = loss_kind_from_string(cells[0]);
        r.seed = std::stoull(cells[1]);
        r.metrics.dsc = parse_real(cells[2]);
        r.metrics.jac = parse_real(cells[3]);
        r.metrics.pre = parse_real(cells[4]);
        r.metrics.rec = parse_real(cells[5]);
        r.metrics.hau95 = parse_real(cells[6]);
        r.metrics.flags.hau95_undefined = r.metrics.hau95 != r.metrics.hau95;
        r.steps = std::stoull(cells[7]);
        r.final_loss = parse_real(cells[8]);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace osc
