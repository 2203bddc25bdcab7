#include "memsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>

#include <fmt/format.h>

#include "memsim/engine.hpp"
#include "memsim/error.hpp"
#include "memsim/number_format.hpp"

namespace memsim {

namespace {

void require_same_length(std::span<const double> v, std::span<const double> i) {
    if (v.size() != i.size()) throw InputError("voltage and current series differ in length");
}

struct Vertex {
    double v;
    double i;
    bool pinch;
};

// Cyclic vertex list with interpolated zero crossings of v inserted.
std::vector<Vertex> with_crossings(std::span<const double> v, std::span<const double> i) {
    std::vector<Vertex> out;
    out.reserve(v.size() + 8);
    const std::size_t n = v.size();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = (k + 1) % n;
        out.push_back({v[k], i[k], v[k] == 0.0});
        if (v[k] * v[j] < 0.0) {
            const double s = v[k] / (v[k] - v[j]);
            out.push_back({0.0, i[k] + s * (i[j] - i[k]), true});
        }
    }
    return out;
}

double shoelace(const std::vector<Vertex>& pts, std::size_t first, std::size_t count) {
    const std::size_t n = pts.size();
    double twice = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
        const auto& a = pts[(first + s) % n];
        const auto& b = pts[(first + (s + 1) % count) % n];
        twice += a.v * b.i - b.v * a.i;
    }
    return 0.5 * std::fabs(twice);
}

}  // namespace

double pinch_test(std::span<const double> v, std::span<const double> i) {
    require_same_length(v, i);
    bool found = false;
    double worst = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] == 0.0) {
            found = true;
            worst = std::max(worst, std::fabs(i[k]));
        } else if (k + 1 < v.size() && v[k] * v[k + 1] < 0.0) {
            const double s = v[k] / (v[k] - v[k + 1]);
            found = true;
            worst = std::max(worst, std::fabs(i[k] + s * (i[k + 1] - i[k])));
        }
    }
    if (!found) throw InputError("no pinch points");
    return worst;
}

double loop_area(std::span<const double> v, std::span<const double> i) {
    require_same_length(v, i);
    if (v.size() < 3) throw InputError("loop area needs at least 3 samples");
    const auto pts = with_crossings(v, i);
    std::vector<std::size_t> cuts;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (pts[k].pinch) cuts.push_back(k);
    }
    if (cuts.size() <= 1) return shoelace(pts, cuts.empty() ? 0 : cuts.front(), pts.size());

    double area = 0.0;
    for (std::size_t c = 0; c < cuts.size(); ++c) {
        const std::size_t from = cuts[c];
        const std::size_t to = cuts[(c + 1) % cuts.size()];
        const std::size_t count = (to + pts.size() - from) % pts.size() + 1;
        area += shoelace(pts, from, count);
    }
    return area;
}

std::size_t lobe_count(std::span<const double> v) {
    const std::size_t n = v.size();
    std::size_t cuts = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (v[k] == 0.0 || v[k] * v[(k + 1) % n] < 0.0) ++cuts;
    }
    return std::max<std::size_t>(cuts, 1);
}

namespace {

const Device& analyzed_memristor(const Circuit& c, const std::string& id) {
    for (const auto& d : c.devices()) {
        if (d.kind() != DeviceKind::memristor) continue;
        if (id.empty() || to_lower(d.id) == to_lower(id)) return d;
    }
    throw InputError(id.empty() ? std::string("circuit has no memristor")
                                : fmt::format("no memristor named {}", id));
}

SweepRun run_one(const Circuit& tmpl, const std::string& source_id, const SineSource& base, double freq,
                 const SweepOptions& opts) {
    Circuit c = tmpl;
    SineSource sine = base;
    sine.freq = freq;
    c.set_source(source_id, sine);

    const double period = 1.0 / freq;
    auto spp = static_cast<std::size_t>(std::llround(period / tmpl.tran()->dt));
    spp = std::max(spp, opts.min_samples_per_period);
    const double guard = max_stable_dt(c);
    if (period / static_cast<double>(spp) > guard) {
        spp = static_cast<std::size_t>(std::ceil(period / guard));
    }

    const Device& dev = analyzed_memristor(c, opts.memristor);
    const auto& m = std::get<MemristorElement>(dev.element);
    const std::string va = fmt::format("v({})", c.node_name(m.a));
    const std::string vb = fmt::format("v({})", c.node_name(m.b));

    SimConfig cfg;
    cfg.dt = period / static_cast<double>(spp);
    cfg.tstop = static_cast<double>(opts.periods * spp) * cfg.dt;
    cfg.strobe = c.strobe();
    cfg.record = {va, vb, fmt::format("i({})", dev.id), fmt::format("vg({})", dev.id)};
    SweepRun run{{}, transient(c, cfg)};

    const auto a = run.waveform.series(0);
    const auto b = run.waveform.series(1);
    const auto cur = run.waveform.series(2);
    const std::size_t last = run.waveform.samples() - 1;
    const std::size_t first = last + 1 - spp;
    std::vector<double> v(spp), i(spp);
    for (std::size_t k = 0; k < spp; ++k) {
        v[k] = a[first + k] - b[first + k];
        i[k] = cur[first + k];
    }
    run.metrics.frequency = freq;
    run.metrics.area = loop_area(v, i);
    run.metrics.pinch_deviation = pinch_test(v, i);
    run.metrics.lobes = lobe_count(v);
    return run;
}

}  // namespace

std::vector<SweepRun> frequency_sweep(const Circuit& tmpl, std::span<const double> freqs,
                                      const SweepOptions& opts) {
    tmpl.check();
    if (freqs.empty()) throw InputError("frequency list is empty");
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        if (!(std::isfinite(freqs[k]) && freqs[k] > 0)) throw InputError("frequencies must be positive");
        if (k > 0 && !(freqs[k] > freqs[k - 1])) throw InputError("frequencies must be strictly increasing");
    }
    if (opts.periods < 2) throw InputError("frequency sweep needs at least 2 periods");
    if (opts.min_samples_per_period < 3) throw InputError("need at least 3 samples per period");

    const Device* sine_dev = nullptr;
    for (const auto& d : tmpl.devices()) {
        const auto* src = std::get_if<VoltageSourceElement>(&d.element);
        if (src == nullptr || !std::holds_alternative<SineSource>(src->spec)) continue;
        if (sine_dev != nullptr) throw InputError("template must contain exactly one sin source");
        sine_dev = &d;
    }
    if (sine_dev == nullptr) throw InputError("template must contain exactly one sin source");
    const auto base = std::get<SineSource>(std::get<VoltageSourceElement>(sine_dev->element).spec);
    const std::string id = sine_dev->id;

    std::vector<SweepRun> runs;
    runs.reserve(freqs.size());
    if (opts.parallel && freqs.size() > 1) {
        std::vector<std::future<SweepRun>> jobs;
        for (double f : freqs) {
            jobs.push_back(std::async(std::launch::async, [&, f] { return run_one(tmpl, id, base, f, opts); }));
        }
        for (auto& j : jobs) runs.push_back(j.get());
    } else {
        for (double f : freqs) runs.push_back(run_one(tmpl, id, base, f, opts));
    }
    return runs;
}

std::vector<LoopMetrics> frequency_collapse(const Circuit& tmpl, std::span<const double> freqs,
                                            const SweepOptions& opts) {
    std::vector<LoopMetrics> out;
    for (auto& r : frequency_sweep(tmpl, freqs, opts)) out.push_back(r.metrics);
    return out;
}

void write_metrics_csv(std::ostream& out, std::span<const LoopMetrics> metrics) {
    out << "freq,area,pinch_dev,lobes\n";
    for (const auto& m : metrics) {
        out << format_sci9(m.frequency) << ',' << format_sci9(m.area) << ',' << format_sci9(m.pinch_deviation)
            << ',' << m.lobes << '\n';
    }
}

StaircaseVerdict pulse_staircase(const Waveform& w, std::string_view vg_signal,
                                 std::span<const PulseEvent> schedule) {
    StaircaseVerdict verdict;
    if (schedule.empty()) return verdict;
    const auto vg = w.series(vg_signal);
    if (w.samples() == 0) throw InputError("empty waveform");

    // Last sample strictly before t; sample 0 holds the initial state.
    auto before = [&](double t) -> std::size_t {
        const double pos = t / w.dt();
        auto k = static_cast<long long>(std::ceil(pos - 1e-9)) - 1;
        return static_cast<std::size_t>(std::max(k, 0LL));
    };

    for (std::size_t p = 0; p < schedule.size(); ++p) {
        const auto& ev = schedule[p];
        if (!(ev.t >= 0 && ev.t <= w.duration())) {
            throw InputError(fmt::format("schedule time {} outside record [0, {}]", ev.t, w.duration()));
        }
        if (ev.polarity != 1 && ev.polarity != -1) throw InputError("pulse polarity must be +1 or -1");
        if (p > 0 && ev.t < schedule[p - 1].t) throw InputError("pulse schedule must be sorted by time");
    }
    constexpr double tolerance = 1e-9;
    for (std::size_t p = 0; p < schedule.size(); ++p) {
        const std::size_t from = before(schedule[p].t);
        const std::size_t to = p + 1 < schedule.size() ? before(schedule[p + 1].t) : w.samples() - 1;
        const double step = vg[to] - vg[from];
        verdict.step_sizes.push_back(step);
        if (schedule[p].polarity > 0 ? step < -tolerance : step > tolerance) verdict.monotone_ok = false;
    }
    return verdict;
}

PwlSource pulse_train(std::span<const PulseEvent> schedule, double baseline, double amplitude, double width,
                      double edge) {
    if (!(width > edge && edge > 0)) throw InputError("pulse train needs width > edge > 0");
    PwlSource pwl;
    pwl.points.push_back({0.0, baseline});
    for (const auto& ev : schedule) {
        const double level = baseline + (ev.polarity >= 0 ? amplitude : -amplitude);
        for (PwlPoint pt : {PwlPoint{ev.t - edge, baseline}, PwlPoint{ev.t, level},
                            PwlPoint{ev.t + width - edge, level}, PwlPoint{ev.t + width, baseline}}) {
            if (!(pt.t > pwl.points.back().t)) {
                throw InputError(fmt::format("pulse at {} overlaps the previous one", ev.t));
            }
            pwl.points.push_back(pt);
        }
    }
    return pwl;
}

PwlSource modulated_half_sine(const HalfSineSpec& spec) {
    if (!(spec.carrier_freq > 0 && spec.envelope_freq > 0)) throw InputError("half sine frequencies must be positive");
    if (!(spec.depth >= 0 && spec.depth <= 1)) throw InputError("modulation depth must lie in [0, 1]");
    if (spec.cycles == 0 || spec.points_per_cycle < 4) throw InputError("half sine needs cycles and >= 4 points per cycle");
    if (spec.polarity != 1 && spec.polarity != -1) throw InputError("half sine polarity must be +1 or -1");
    PwlSource pwl;
    const std::size_t n = spec.cycles * spec.points_per_cycle;
    const double dt = 1.0 / (spec.carrier_freq * static_cast<double>(spec.points_per_cycle));
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double envelope = 1.0 - spec.depth * 0.5 * (1.0 + std::cos(two_pi * spec.envelope_freq * t));
        const double carrier = std::max(0.0, std::sin(two_pi * spec.carrier_freq * t));
        pwl.points.push_back({t, spec.offset + spec.polarity * spec.amplitude * envelope * carrier});
    }
    return pwl;
}

}  // namespace memsim
