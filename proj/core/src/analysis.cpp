#include "poresim/analysis.hpp"

#include "poresim/errors.hpp"
#include "poresim/integrator.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace poresim {

namespace {

// shortest round-trip formatting, locale independent
std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view sv) {
    double v = 0.0;
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (res.ec != std::errc{} || res.ptr != sv.data() + sv.size())
        throw InputError("trajectory CSV: bad number '" + std::string(sv) + "'");
    return v;
}

} // namespace

Agg1 agg1(const SystemState& state) {
    return {state.mb.sum(), state.dom.sum(), state.som.sum(), state.fom.sum(),
            state.co2.sum()};
}

std::array<double, 3> agg2(const Agg1& v) {
    return {v[0], v[1] + v[2] + v[3], v[4]};
}

std::array<double, 3> proj(const Agg1& v) {
    return {v[0], v[1], v[4]};
}

AttractorReport attractor_report(const Trajectory& traj, double mb_threshold_fraction,
                                 double window_days) {
    if (traj.records.size() < 2 || traj.duration_days() < window_days)
        throw InputError("attractor_report: trajectory shorter than the trailing window");

    const double total0 = agg_total(traj.records.front().totals);
    const double threshold = mb_threshold_fraction * total0;
    const double jitter = 1e-6 * total0;

    AttractorReport rep;
    rep.mb_threshold = threshold;
    rep.terminal_point = agg2(traj.records.back().totals);

    for (const auto& rec : traj.records)
        if (rec.totals[kMb] <= threshold) {
            rep.time_to_mb_extinction_days = rec.t_days;
            break;
        }

    const double window_start = traj.records.back().t_days - window_days;
    bool monotone = true;
    bool first = true;
    double prev_mb = 0.0;
    for (const auto& rec : traj.records) {
        if (rec.t_days < window_start) continue;
        const auto a2 = agg2(rec.totals);
        if (first) {
            rep.box_lo = rep.box_hi = a2;
        } else {
            for (int k = 0; k < 3; ++k) {
                rep.box_lo[k] = std::min(rep.box_lo[k], a2[k]);
                rep.box_hi[k] = std::max(rep.box_hi[k], a2[k]);
            }
            if (rec.totals[kMb] > prev_mb + jitter) monotone = false;
        }
        prev_mb = rec.totals[kMb];
        first = false;
    }

    rep.converged = (traj.records.back().totals[kMb] <= threshold) && monotone;
    return rep;
}

double conservation_audit(const Trajectory& traj) {
    if (traj.records.size() < 2)
        throw InputError("conservation_audit: need at least 2 records");
    const double sum0 = agg_total(traj.records.front().totals);
    double worst = 0.0;
    for (const auto& rec : traj.records) {
        const double sum = agg_total(rec.totals);
        const double drift = sum0 > 0.0 ? std::abs(sum - sum0) / sum0 : std::abs(sum);
        worst = std::max(worst, drift);
    }
    return worst;
}

void export_trajectory(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write trajectory CSV: " + path);
    out << "t,B,N,M1,M2,C,conservation_error\n";
    for (const auto& rec : traj.records) {
        out << format_double(rec.t_days);
        for (const double v : rec.totals) out << ',' << format_double(v);
        out << ',' << format_double(rec.conservation_error) << '\n';
    }
    if (!out) throw InputError("short write: " + path);
}

Trajectory import_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open trajectory CSV: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "t,B,N,M1,M2,C,conservation_error")
        throw InputError("trajectory CSV " + path + ": unexpected header");

    Trajectory traj;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<std::string_view, 7> fields;
        std::string_view sv(line);
        for (int k = 0; k < 7; ++k) {
            const auto comma = sv.find(',');
            if (k < 6) {
                if (comma == std::string_view::npos)
                    throw InputError("trajectory CSV " + path + ": short row '" + line + "'");
                fields[k] = sv.substr(0, comma);
                sv.remove_prefix(comma + 1);
            } else {
                if (comma != std::string_view::npos)
                    throw InputError("trajectory CSV " + path + ": extra fields in '" + line + "'");
                fields[k] = sv;
            }
        }
        TrajectoryRecord rec;
        rec.t_days = parse_double(fields[0]);
        for (int k = 0; k < 5; ++k) rec.totals[k] = parse_double(fields[k + 1]);
        rec.conservation_error = parse_double(fields[6]);
        traj.records.push_back(rec);
    }
    return traj;
}

void export_report(const AttractorReport& rep, const std::string& path) {
    nlohmann::json j{{"converged", rep.converged},
                     {"time_to_mb_extinction_days", rep.time_to_mb_extinction_days},
                     {"terminal_point", rep.terminal_point},
                     {"terminal_box_lo", rep.box_lo},
                     {"terminal_box_hi", rep.box_hi},
                     {"mb_threshold_ugc", rep.mb_threshold}};
    std::ofstream out(path);
    if (!out) throw InputError("cannot write report: " + path);
    out << j.dump(2) << '\n';
}

} // namespace poresim
