#include "evmarker/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace evm {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_num(std::string_view s, T& v) {
    s = trim(s);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void fail(const std::string& what, int lineno, std::string_view line) {
    throw ParseError("line " + std::to_string(lineno) + ": " + what + " \"" + std::string(line) + "\"");
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    return out;
}

bool skip_line(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

std::string fmt3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    // avoid "-0.000"
    if (std::string_view(buf) == "-0.000") return "0.000";
    return buf;
}

}  // namespace

EventFile read_events(std::istream& in) {
    EventFile f;
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto parts = split(line, ',');
        if (!header) {
            if (parts.size() != 2 || !parse_num(parts[0], f.geometry.width) || !parse_num(parts[1], f.geometry.height))
                fail("expected header \"w,h\"", lineno, line);
            try {
                validate_geometry(f.geometry);
            } catch (const EventStreamError& e) {
                fail(e.what(), lineno, line);
            }
            header = true;
            continue;
        }
        Event e;
        int p = 0;
        if (parts.size() != 4 || !parse_num(parts[0], e.t) || !parse_num(parts[1], e.x) || !parse_num(parts[2], e.y) ||
            !parse_num(parts[3], p))
            fail("expected \"t_us,x,y,p\"", lineno, line);
        if (p != 0 && p != 1) fail("polarity must be 0 or 1", lineno, line);
        if (!f.geometry.contains(e.x, e.y)) fail("pixel outside the sensor", lineno, line);
        if (e.t < 0) fail("negative timestamp", lineno, line);
        if (!f.events.empty() && e.t < f.events.back().t) fail("timestamps must be non-decreasing", lineno, line);
        e.polarity = p ? Polarity::On : Polarity::Off;
        f.events.push_back(e);
    }
    if (!header) throw ParseError("missing \"w,h\" header");
    return f;
}

EventFile read_events(const std::string& path) {
    auto in = open_in(path);
    return read_events(in);
}

void write_events(std::ostream& out, const SensorGeometry& g, std::span<const Event> events) {
    out << g.width << ',' << g.height << '\n';
    for (const Event& e : events) out << e.t << ',' << e.x << ',' << e.y << ',' << static_cast<int>(e.polarity) << '\n';
}

void write_events(const std::string& path, const SensorGeometry& g, std::span<const Event> events) {
    auto out = open_out(path);
    write_events(out, g, events);
}

std::vector<TruthFrame> read_truth(std::istream& in) {
    std::vector<TruthFrame> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skip_line(line)) continue;
        const auto parts = split(line, ',');
        TruthFrame f;
        int visible = 0;
        bool ok = parts.size() == 11 && parse_num(parts[0], f.t_mid) && parse_num(parts[1], f.marker_id) &&
                  parse_num(parts[10], visible) && (visible == 0 || visible == 1);
        for (std::size_t k = 0; ok && k < 4; ++k)
            ok = parse_num(parts[2 + 2 * k], f.corners[k].x) && parse_num(parts[3 + 2 * k], f.corners[k].y);
        if (!ok) fail("expected \"t_mid,id,x0,y0,x1,y1,x2,y2,x3,y3,visible\"", lineno, line);
        f.fully_visible = visible == 1;
        out.push_back(f);
    }
    return out;
}

std::vector<TruthFrame> read_truth(const std::string& path) {
    auto in = open_in(path);
    return read_truth(in);
}

void write_truth(std::ostream& out, std::span<const TruthFrame> truth) {
    out << "# t_mid,id,x0,y0,x1,y1,x2,y2,x3,y3,visible\n";
    for (const TruthFrame& f : truth) {
        out << f.t_mid << ',' << f.marker_id;
        for (const Point2& p : f.corners) out << ',' << fmt3(p.x) << ',' << fmt3(p.y);
        out << ',' << (f.fully_visible ? 1 : 0) << '\n';
    }
}

void write_truth(const std::string& path, std::span<const TruthFrame> truth) {
    auto out = open_out(path);
    write_truth(out, truth);
}

std::vector<ReportRecord> to_records(std::span<const PacketResult> results) {
    std::vector<ReportRecord> out;
    for (const PacketResult& r : results)
        for (const Detection& d : r.detections) out.push_back({r.packet_index, r.t_mid, d.marker_id, d.rotation_deg, d.corners});
    return out;
}

void write_report(std::ostream& out, std::span<const ReportRecord> records) {
    out << "# packet_index,t_mid,id,rotation,x0,y0,x1,y1,x2,y2,x3,y3\n";
    for (const ReportRecord& r : records) {
        out << r.packet_index << ',' << r.t_mid << ',' << r.marker_id << ',' << r.rotation_deg;
        for (const Point2& p : r.corners) out << ',' << fmt3(p.x) << ',' << fmt3(p.y);
        out << '\n';
    }
}

std::vector<ReportRecord> read_report(std::istream& in) {
    std::vector<ReportRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skip_line(line)) continue;
        const auto parts = split(line, ',');
        ReportRecord r;
        bool ok = parts.size() == 12 && parse_num(parts[0], r.packet_index) && parse_num(parts[1], r.t_mid) &&
                  parse_num(parts[2], r.marker_id) && parse_num(parts[3], r.rotation_deg);
        for (std::size_t k = 0; ok && k < 4; ++k)
            ok = parse_num(parts[4 + 2 * k], r.corners[k].x) && parse_num(parts[5 + 2 * k], r.corners[k].y);
        if (!ok) fail("malformed report record", lineno, line);
        out.push_back(r);
    }
    return out;
}

PipelineConfig read_config(std::istream& in) {
    PipelineConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skip_line(line)) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value", lineno, line);
        const std::string key(trim(std::string_view(line).substr(0, eq)));
        const std::string_view val = trim(std::string_view(line).substr(eq + 1));
        bool ok = true;
        auto flag = [&](bool& b) {
            if (val == "1" || val == "true") b = true;
            else if (val == "0" || val == "false") b = false;
            else ok = false;
        };
        if (key == "W") ok = parse_num(val, c.W);
        else if (key == "H") ok = parse_num(val, c.H);
        else if (key == "n_s") ok = parse_num(val, c.n_s);
        else if (key == "sigma_s") ok = parse_num(val, c.sigma_s);
        else if (key == "l_min") ok = parse_num(val, c.l_min);
        else if (key == "s_c") ok = parse_num(val, c.s_c);
        else if (key == "n_d") ok = parse_num(val, c.n_d);
        else if (key == "sigma_d") ok = parse_num(val, c.sigma_d);
        else if (key == "theta") ok = parse_num(val, c.theta);
        else if (key == "window_us") ok = parse_num(val, c.window_us);
        else if (key == "noise_filter") flag(c.noise_filter);
        else if (key == "noise_radius") ok = parse_num(val, c.noise_radius);
        else if (key == "noise_window_us") ok = parse_num(val, c.noise_window_us);
        else if (key == "flip") flag(c.flip);
        else if (key == "shift_polarity") {
            if (val == "off") c.shift_polarity = ShiftPolarity::Off;
            else if (val == "on") c.shift_polarity = ShiftPolarity::On;
            else if (val == "both") c.shift_polarity = ShiftPolarity::Both;
            else if (val == "none") c.shift_polarity = ShiftPolarity::None;
            else ok = false;
        } else if (key == "candidate_cap") ok = parse_num(val, c.candidate_cap);
        else if (key == "max_shift") ok = parse_num(val, c.max_shift);
        else fail("unknown key", lineno, line);
        if (!ok) fail("bad value for " + key, lineno, line);
    }
    try {
        c.validate();
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid config: ") + e.what());
    }
    return c;
}

PipelineConfig load_config(const std::string& path) {
    auto in = open_in(path);
    return read_config(in);
}

void write_config(std::ostream& out, const PipelineConfig& c) {
    const char* shift = c.shift_polarity == ShiftPolarity::Off    ? "off"
                        : c.shift_polarity == ShiftPolarity::On   ? "on"
                        : c.shift_polarity == ShiftPolarity::Both ? "both"
                                                                  : "none";
    out << "W = " << c.W << "\nH = " << c.H << "\nn_s = " << c.n_s << "\nsigma_s = " << c.sigma_s
        << "\nl_min = " << c.l_min << "\ns_c = " << c.s_c << "\nn_d = " << c.n_d << "\nsigma_d = " << c.sigma_d
        << "\ntheta = " << c.theta << "\nwindow_us = " << c.window_us << "\nnoise_filter = " << c.noise_filter
        << "\nnoise_radius = " << c.noise_radius << "\nnoise_window_us = " << c.noise_window_us
        << "\nflip = " << c.flip << "\nshift_polarity = " << shift << "\ncandidate_cap = " << c.candidate_cap
        << "\nmax_shift = " << c.max_shift << '\n';
}

}  // namespace evm
