#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "evmarker/event_model.hpp"
#include "evmarker/pipeline.hpp"
#include "evmarker/simulator.hpp"

namespace evm {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EventFile {
    SensorGeometry geometry;
    std::vector<Event> events;
};

/// "w,h" header, then "t_us,x,y,p" lines with p in {0, 1} (1 = On).
EventFile read_events(std::istream& in);
EventFile read_events(const std::string& path);
void write_events(std::ostream& out, const SensorGeometry& g, std::span<const Event> events);
void write_events(const std::string& path, const SensorGeometry& g, std::span<const Event> events);

/// "t_mid,id,x0,y0,...,x3,y3,visible" per frame.
std::vector<TruthFrame> read_truth(std::istream& in);
std::vector<TruthFrame> read_truth(const std::string& path);
void write_truth(std::ostream& out, std::span<const TruthFrame> truth);
void write_truth(const std::string& path, std::span<const TruthFrame> truth);

/// One detection per line: "packet_index,t_mid,id,rotation,x0,y0,...,x3,y3".
struct ReportRecord {
    std::size_t packet_index = 0;
    std::int64_t t_mid = 0;
    int marker_id = -1;
    int rotation_deg = 0;
    Quad corners{};
};

std::vector<ReportRecord> to_records(std::span<const PacketResult> results);
void write_report(std::ostream& out, std::span<const ReportRecord> records);
std::vector<ReportRecord> read_report(std::istream& in);

/// Flat "key = value" text, '#' comments. Unknown keys are errors.
PipelineConfig read_config(std::istream& in);
PipelineConfig load_config(const std::string& path);
void write_config(std::ostream& out, const PipelineConfig& cfg);

}  // namespace evm
