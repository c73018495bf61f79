#include "gemsim/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "gemsim/bessel.hpp"

namespace gemsim {

const char* to_string(Protocol protocol)
{
    switch (protocol) {
    case Protocol::PlainGem: return "plain_gem";
    case Protocol::TofDiffraction: return "tof_diffraction";
    case Protocol::Sweep: return "sweep";
    case Protocol::Fifo: return "fifo";
    case Protocol::Reorder: return "reorder";
    case Protocol::CustomSchedule: return "custom_schedule";
    }
    return "unknown";
}

TofOptions ExperimentConfig::tof_options(double tau_value) const
{
    TofOptions o;
    o.gradient = gradient;
    o.t0 = t0;
    o.tau = protocol == Protocol::PlainGem ? 0.0 : tau_value;
    o.grating = grating();
    o.grating_phase = grating_phase;
    o.refocus = refocus;
    return o;
}

SequencerOptions ExperimentConfig::sequencer_options() const
{
    SequencerOptions o;
    o.gradient = gradient;
    o.grating = grating();
    o.settle_time = settle_time;
    o.tail_time = tail_time;
    o.grating_duration = grating_duration;
    return o;
}

std::string format_double(double v)
{
    if (v == 0.0) return "0";  // folds -0 so outputs stay byte-stable
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(int line, const std::string& msg)
{
    throw Error(ErrorKind::Validation, "config line " + std::to_string(line) + ": " + msg);
}

double to_number(const std::string& text, int line, const std::string& key)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        config_error(line, key + " expects a number, got '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(v)) config_error(line, key + " expects a finite number, got '" + text + "'");
    return v;
}

int to_int(const std::string& text, int line, const std::string& key)
{
    const double v = to_number(text, line, key);
    if (v != std::floor(v) || std::abs(v) > 1e9) config_error(line, key + " expects an integer, got '" + text + "'");
    return static_cast<int>(v);
}

bool to_bool(const std::string& text, int line, const std::string& key)
{
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    config_error(line, key + " expects true or false, got '" + text + "'");
}

Protocol to_protocol(const std::string& text, int line)
{
    for (Protocol p : {Protocol::PlainGem, Protocol::TofDiffraction, Protocol::Sweep, Protocol::Fifo,
                       Protocol::Reorder, Protocol::CustomSchedule})
        if (text == to_string(p)) return p;
    config_error(line, "unknown protocol '" + text + "'");
}

// "center:width[:amplitude]" entries separated by commas.
std::vector<InputPulse> to_pulses(const std::string& text, int line)
{
    std::vector<InputPulse> out;
    std::stringstream list(text);
    std::string item;
    while (std::getline(list, item, ',')) {
        item = trim(item);
        std::vector<std::string> parts;
        std::stringstream fields(item);
        std::string f;
        while (std::getline(fields, f, ':')) parts.push_back(trim(f));
        if (parts.size() < 2 || parts.size() > 3)
            config_error(line, "pulse '" + item + "' must read center:width or center:width:amplitude");
        InputPulse p;
        p.center = to_number(parts[0], line, "pulses");
        p.width = to_number(parts[1], line, "pulses");
        p.amplitude = parts.size() == 3 ? to_number(parts[2], line, "pulses") : 1.0;
        if (!(p.width > 0.0)) config_error(line, "pulse '" + item + "' needs a positive width");
        out.push_back(p);
    }
    if (out.empty()) config_error(line, "pulses list is empty");
    return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir)
{
    ExperimentConfig c;
    std::optional<double> sample_length, sample_periods;
    std::map<std::string, int> seen;

    using Setter = std::function<void(const std::string&, int)>;
    const std::map<std::string, Setter> setters{
        {"protocol", [&](const std::string& v, int l) { c.protocol = to_protocol(v, l); }},
        {"optical_depth", [&](const std::string& v, int l) { c.optical_depth = to_number(v, l, "optical_depth"); }},
        {"eta_bar", [&](const std::string& v, int l) { c.gradient = to_number(v, l, "eta_bar"); }},
        {"emission_period", [&](const std::string& v, int l) { c.emission_period = to_number(v, l, "emission_period"); }},
        {"nu_bar", [&](const std::string& v, int l) { c.nu = to_number(v, l, "nu_bar"); }},
        {"tau", [&](const std::string& v, int l) { c.tau = to_number(v, l, "tau"); }},
        {"grating_phase", [&](const std::string& v, int l) { c.grating_phase = to_number(v, l, "grating_phase"); }},
        {"refocus", [&](const std::string& v, int l) { c.refocus = to_bool(v, l, "refocus"); }},
        {"t0", [&](const std::string& v, int l) { c.t0 = to_number(v, l, "t0"); }},
        {"pulses", [&](const std::string& v, int l) { c.pulses = to_pulses(v, l); }},
        {"settle_time", [&](const std::string& v, int l) { c.settle_time = to_number(v, l, "settle_time"); }},
        {"tail_time", [&](const std::string& v, int l) { c.tail_time = to_number(v, l, "tail_time"); }},
        {"grating_duration", [&](const std::string& v, int l) { c.grating_duration = to_number(v, l, "grating_duration"); }},
        {"sweep_min", [&](const std::string& v, int l) { c.sweep_min = to_number(v, l, "sweep_min"); }},
        {"sweep_max", [&](const std::string& v, int l) { c.sweep_max = to_number(v, l, "sweep_max"); }},
        {"sweep_points", [&](const std::string& v, int l) { c.sweep_points = to_int(v, l, "sweep_points"); }},
        {"detection_threshold",
         [&](const std::string& v, int l) { c.detection_threshold = to_number(v, l, "detection_threshold"); }},
        {"schedule_file", [&](const std::string& v, int) { c.schedule_file = base_dir / v; }},
        {"output_dir", [&](const std::string& v, int) { c.output_dir = v; }},
        {"sample_length", [&](const std::string& v, int l) { sample_length = to_number(v, l, "sample_length"); }},
        {"sample_periods", [&](const std::string& v, int l) { sample_periods = to_number(v, l, "sample_periods"); }},
        {"grid_points", [&](const std::string& v, int l) { c.params.grid_points = to_int(v, l, "grid_points"); }},
        {"time_step", [&](const std::string& v, int l) { c.params.time_step = to_number(v, l, "time_step"); }},
        {"record_stride", [&](const std::string& v, int l) { c.params.record_stride = to_int(v, l, "record_stride"); }},
        {"snapshot_stride",
         [&](const std::string& v, int l) { c.params.snapshot_stride = to_int(v, l, "snapshot_stride"); }},
        {"detuning_origin",
         [&](const std::string& v, int l) { c.params.detuning_origin = to_number(v, l, "detuning_origin"); }},
    };

    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) config_error(line, "expected 'key = value', got '" + text + "'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) config_error(line, "unknown key '" + key + "'");
        if (value.empty()) config_error(line, "key '" + key + "' has no value");
        if (seen.count(key)) config_error(line, "key '" + key + "' repeats line " + std::to_string(seen[key]));
        seen[key] = line;
        it->second(value, line);
    }

    auto require = [&](bool ok, const std::string& msg) {
        if (!ok) throw Error(ErrorKind::Validation, "config: " + msg);
    };
    require(seen.count("protocol") == 1, "missing required key 'protocol'");
    require(!(sample_length && sample_periods), "give sample_length or sample_periods, not both");
    require(c.gradient > 0.0, "eta_bar must be > 0");
    require(c.emission_period > 0.0, "emission_period must be > 0");
    require(c.optical_depth >= 0.0, "optical_depth must be >= 0");
    require(c.nu >= 0.0, "nu_bar must be >= 0");
    require(c.tau >= 0.0, "tau must be >= 0");
    require(c.detection_threshold > 0.0 && c.detection_threshold < 1.0, "detection_threshold must lie in (0, 1)");
    if (c.protocol == Protocol::Sweep) {
        require(c.sweep_points >= 3, "sweep_points must be >= 3");
        require(c.sweep_min >= 0.0 && c.sweep_max > c.sweep_min, "sweep range needs 0 <= sweep_min < sweep_max");
        require(c.nu > 0.0, "sweeps need nu_bar > 0");
    }
    if (c.protocol == Protocol::CustomSchedule) {
        require(seen.count("schedule_file") == 1, "custom_schedule needs the required key 'schedule_file'");
        require(std::filesystem::exists(c.schedule_file),
                "schedule_file '" + c.schedule_file.string() + "' does not exist");
    }
    if ((c.protocol == Protocol::PlainGem || c.protocol == Protocol::TofDiffraction || c.protocol == Protocol::Sweep))
        require(c.pulses.size() == 1, std::string(to_string(c.protocol)) + " takes exactly one pulse");

    c.params.atomic_density = SimulationParams::density_for(c.optical_depth, c.gradient);
    if (sample_length) c.params.sample_length = *sample_length;
    if (sample_periods) c.params.sample_length = *sample_periods * 2.0 * kPi / c.grating_wavenumber();
    c.params.check();

    if (c.protocol == Protocol::CustomSchedule) {
        ControlSchedule s = read_schedule_csv(c.schedule_file);
        s.input_pulses = c.pulses;
        const auto report = validate_schedule(s, c.params);
        if (!report.ok())
            throw Error(ErrorKind::Validation, "schedule_file '" + c.schedule_file.string() + "':\n" + report.summary());
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read config '" + path.string() + "'");
    return parse_config(in, path.parent_path());
}

ControlSchedule read_schedule_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read schedule '" + path.string() + "'");
    ControlSchedule s;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = trim(raw);
        if (text.empty() || text.front() == '#') continue;
        if (line == 1 && text.rfind("t_start", 0) == 0) continue;
        std::vector<double> v;
        std::stringstream cells(text);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            const std::string t = trim(cell);
            std::size_t used = 0;
            double x = 0.0;
            try {
                x = std::stod(t, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != t.size())
                throw Error(ErrorKind::Validation,
                            path.string() + " line " + std::to_string(line) + ": bad number '" + t + "'");
            v.push_back(x);
        }
        if (v.size() != 6)
            throw Error(ErrorKind::Validation, path.string() + " line " + std::to_string(line) +
                                                   ": expected 6 columns, got " + std::to_string(v.size()));
        s.segments.push_back(Segment{v[0], v[1], Controls{v[2], v[3], v[4], v[5]}});
    }
    if (s.segments.empty()) throw Error(ErrorKind::Validation, path.string() + ": no segments");
    return s;
}

ProtocolPlan make_plan(const ExperimentConfig& c)
{
    switch (c.protocol) {
    case Protocol::PlainGem:
    case Protocol::TofDiffraction:
    case Protocol::Sweep: return build_tof_plan(c.params, c.pulses.front(), c.tof_options(c.tau));
    case Protocol::Fifo: return build_fifo_plan(c.params, c.pulses, c.sequencer_options());
    case Protocol::Reorder: return build_reorder_plan(c.params, c.pulses, c.sequencer_options());
    case Protocol::CustomSchedule: {
        ProtocolPlan plan;
        plan.schedule = read_schedule_csv(c.schedule_file);
        plan.schedule.input_pulses = c.pulses;
        plan.notes.push_back("custom schedule from " + c.schedule_file.filename().string());
        const auto report = validate_schedule(plan.schedule, c.params);
        if (!report.ok()) throw Error(ErrorKind::Validation, report.summary());
        return plan;
    }
    }
    throw Error(ErrorKind::Validation, "unknown protocol");
}

ValidationReport validate_config(const ExperimentConfig& c)
{
    ValidationReport report;
    std::vector<ProtocolPlan> plans;
    plans.push_back(make_plan(c));
    if (c.protocol == Protocol::Sweep) {
        for (double tau : sweep_taus(c)) plans.push_back(build_tof_plan(c.params, c.pulses.front(), c.tof_options(tau)));
    }
    for (const auto& p : plans) {
        const auto r = validate_schedule(p.schedule, c.params);
        report.findings.insert(report.findings.end(), r.findings.begin(), r.findings.end());
    }
    return report;
}

std::vector<double> sweep_taus(const ExperimentConfig& c)
{
    std::vector<double> taus;
    for (int i = 0; i < c.sweep_points; ++i) {
        const double x = c.sweep_min + (c.sweep_max - c.sweep_min) * i / (c.sweep_points - 1);
        taus.push_back(x / c.nu);
    }
    return taus;
}

namespace {

TimeWindow efficiency_window(const ExperimentConfig& c, const ProtocolPlan& plan, const SimulationRecord& rec)
{
    switch (c.protocol) {
    case Protocol::PlainGem:
    case Protocol::TofDiffraction:
    case Protocol::Sweep: return plan.readout_window();
    case Protocol::Fifo:
    case Protocol::Reorder: {
        double after = rec.times.front();
        for (const auto& g : group_pulses(c.pulses)) after = std::max(after, g.end);
        return TimeWindow{after, rec.times.back()};
    }
    case Protocol::CustomSchedule: break;
    }
    return TimeWindow{rec.times.front(), rec.times.back()};
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    body(out);
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c, bool write)
{
    ExperimentResult r;
    r.plan = make_plan(c);
    r.record = run(c.params, r.plan.schedule);
    r.balance = energy_balance(r.record);
    r.outputs = detect_pulses(r.record, c.detection_threshold);
    r.matches = match_pulses(detect_pulses(r.record.times, r.record.input_intensity, c.detection_threshold),
                             r.outputs);

    std::optional<double> baseline;
    if (c.protocol == Protocol::TofDiffraction || c.protocol == Protocol::Sweep) {
        TofOptions plain = c.tof_options(0.0);
        const auto base_plan = build_tof_plan(c.params, c.pulses.front(), plain);
        baseline = retrieval_efficiency(run(c.params, base_plan.schedule), base_plan.readout_window()).efficiency;
    }
    r.efficiency = retrieval_efficiency(r.record, efficiency_window(c, r.plan, r.record), baseline);

    if (c.protocol == Protocol::Sweep) {
        const auto taus = sweep_taus(c);
        r.sweep = efficiency_sweep(
            c.params, [&](double tau) { return build_tof_plan(c.params, c.pulses.front(), c.tof_options(tau)); },
            taus);
        r.fit = fit_j0_squared(r.sweep, c.nu);
        try {
            r.null_position = first_null(r.sweep, c.nu);
        } catch (const Error&) {
            r.null_position.reset();
        }
    }

    if (write) {
        std::error_code ec;
        std::filesystem::create_directories(c.output_dir, ec);
        if (ec) throw Error(ErrorKind::Io, "cannot create '" + c.output_dir.string() + "': " + ec.message());
        write_file(c.output_dir / "timeseries.csv", [&](std::ostream& o) { write_timeseries(r.record, o); });
        write_file(c.output_dir / "kmap.csv", [&](std::ostream& o) { write_kmap(r.record, c.params, o); });
        if (c.protocol == Protocol::Sweep)
            write_file(c.output_dir / "sweep.csv", [&](std::ostream& o) { write_sweep(r.sweep, o); });
        write_file(c.output_dir / "report.txt", [&](std::ostream& o) { write_report(c, r, o); });
    }
    return r;
}

void write_timeseries(const SimulationRecord& rec, std::ostream& out)
{
    out << "t,input_intensity,output_intensity,stored_energy\n";
    for (std::size_t i = 0; i < rec.size(); ++i)
        out << format_double(rec.times[i]) << ',' << format_double(rec.input_intensity[i]) << ','
            << format_double(rec.output_intensity[i]) << ',' << format_double(rec.stored_energy[i]) << '\n';
}

void write_kmap(const SimulationRecord& rec, const SimulationParams& params, std::ostream& out)
{
    const RealVector k = wavenumbers(params);
    std::vector<RealVector> columns;
    out << "k/t";
    for (const auto& snap : rec.snapshots) {
        out << ',' << format_double(snap.time);
        columns.push_back(to_spectrum(snap, params).psi.cwiseAbs2());
    }
    out << '\n';
    for (Eigen::Index m = 0; m < k.size(); ++m) {
        out << format_double(k[m]);
        for (const auto& col : columns) out << ',' << format_double(col[m]);
        out << '\n';
    }
}

void write_sweep(const std::vector<SweepPoint>& points, std::ostream& out)
{
    out << "tau,efficiency_normalized\n";
    for (const auto& p : points) out << format_double(p.tau) << ',' << format_double(p.normalized) << '\n';
}

void write_report(const ExperimentConfig& c, const ExperimentResult& r, std::ostream& out)
{
    out << "protocol: " << to_string(c.protocol) << '\n';
    out << "optical_depth: " << format_double(c.optical_depth) << "  (N = " << format_double(c.params.atomic_density)
        << ", eta_bar = " << format_double(c.gradient) << ")\n";
    out << "grating: nu_bar = " << format_double(c.nu) << ", k_R = " << format_double(c.grating_wavenumber())
        << ", emission period k_R/eta_bar = " << format_double(c.emission_period) << '\n';
    out << "grid: L = " << format_double(c.params.sample_length) << ", points = " << c.params.grid_points
        << ", dt = " << format_double(c.params.time_step) << ", record stride = " << c.params.record_stride << '\n';
    out << "regime: " << to_string(r.plan.regime) << '\n';
    for (const auto& note : r.plan.notes) out << "note: " << note << '\n';

    out << "\n[schedule]\n";
    for (const auto& s : r.plan.schedule.segments)
        out << format_double(s.t_start) << " .. " << format_double(s.t_end)
            << ": eta = " << format_double(s.controls.gradient) << ", nu = " << format_double(s.controls.grating_amplitude)
            << ", phase = " << format_double(s.controls.grating_phase) << '\n';

    out << "\n[efficiency]\n";
    if (r.efficiency) {
        const auto& e = *r.efficiency;
        out << "window: " << format_double(e.window.start) << " .. " << format_double(e.window.end) << '\n';
        out << "input_energy: " << format_double(e.input_energy) << '\n';
        out << "output_energy: " << format_double(e.output_energy) << '\n';
        out << "efficiency: " << format_double(e.efficiency) << '\n';
        if (e.baseline_efficiency) out << "baseline_efficiency: " << format_double(*e.baseline_efficiency) << '\n';
        if (auto n = e.normalized()) out << "normalized_efficiency: " << format_double(*n) << '\n';
    }
    out << "energy_balance: " << format_double(r.balance) << '\n';
    for (const auto& w : r.plan.suppressed_crossings) {
        const double leak = integrate(r.record.times, r.record.output_intensity, w) /
                            (r.efficiency ? r.efficiency->input_energy : 1.0);
        out << "suppressed_crossing: " << format_double(w.start) << " .. " << format_double(w.end)
            << ", leakage = " << format_double(leak) << '\n';
    }

    out << "\n[detected pulses]\n";
    out << "count: " << r.outputs.size() << '\n';
    for (std::size_t i = 0; i < r.outputs.size(); ++i) {
        const auto& p = r.outputs[i];
        out << "pulse " << i << ": peak_time = " << format_double(p.peak_time)
            << ", energy = " << format_double(p.energy);
        if (i < r.matches.size() && r.matches[i].input >= 0)
            out << ", input = " << r.matches[i].input << ", ncc_forward = " << format_double(r.matches[i].forward)
                << ", ncc_reversed = " << format_double(r.matches[i].reversed);
        out << '\n';
    }

    if (!r.plan.predicted_emissions.empty()) {
        out << "\n[emissions]\n";
        for (const auto& e : r.plan.predicted_emissions) {
            const DetectedPulse* nearest = nullptr;
            for (const auto& p : r.outputs)
                if (!nearest || std::abs(p.peak_time - e.time) < std::abs(nearest->peak_time - e.time)) nearest = &p;
            out << "order " << e.order;
            if (e.input >= 0) out << " input " << e.input;
            out << ": predicted = " << format_double(e.time);
            if (nearest) out << ", observed = " << format_double(nearest->peak_time);
            out << '\n';
        }
    }

    if (!r.sweep.empty()) {
        out << "\n[sweep]\n";
        out << "points: " << r.sweep.size() << '\n';
        if (r.fit)
            out << "j0_squared_fit: amplitude = " << format_double(r.fit->amplitude)
                << ", r_squared = " << format_double(r.fit->r_squared) << '\n';
        if (r.null_position) out << "first_null_nu_tau: " << format_double(*r.null_position) << '\n';
    }
}

void export_spectrum(const PolaritonSpectrum& s, const std::filesystem::path& path)
{
    write_file(path, [&](std::ostream& out) {
        out << "k,re_psi,im_psi,abs2_psi\n";
        for (Eigen::Index m = 0; m < s.k.size(); ++m)
            out << format_double(s.k[m]) << ',' << format_double(s.psi[m].real()) << ','
                << format_double(s.psi[m].imag()) << ',' << format_double(std::norm(s.psi[m])) << '\n';
    });
}

std::vector<SpectrumRow> read_spectrum_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read '" + path.string() + "'");
    std::vector<SpectrumRow> rows;
    std::string line;
    std::getline(in, line);
    if (trim(line) != "k,re_psi,im_psi,abs2_psi") throw Error(ErrorKind::Io, path.string() + ": unexpected header");
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::stringstream cells(line);
        std::string a, b, c, d;
        if (!std::getline(cells, a, ',') || !std::getline(cells, b, ',') || !std::getline(cells, c, ',') ||
            !std::getline(cells, d, ','))
            throw Error(ErrorKind::Io, path.string() + ": short row '" + line + "'");
        rows.push_back(SpectrumRow{std::stod(a), Complex{std::stod(b), std::stod(c)}, std::stod(d)});
    }
    return rows;
}

}  // namespace gemsim
