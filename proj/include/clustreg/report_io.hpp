#pragma once

#include "clustreg/clustering.hpp"
#include "clustreg/error.hpp"
#include "clustreg/panel.hpp"
#include "clustreg/pipeline.hpp"
#include "clustreg/regression.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace clustreg {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const ValidationIssue& v);
void from_json(const Json& j, ValidationIssue& v);
void to_json(Json& j, const ValidationReport& v);
void from_json(const Json& j, ValidationReport& v);

void to_json(Json& j, const PenaltySpec& v);
void from_json(const Json& j, PenaltySpec& v);
void to_json(Json& j, const LinearModel& v);
void from_json(const Json& j, LinearModel& v);
void to_json(Json& j, const FitReport& v);
void from_json(const Json& j, FitReport& v);
void to_json(Json& j, const CvRow& v);
void from_json(const Json& j, CvRow& v);
void to_json(Json& j, const PathReport& v);
void from_json(const Json& j, PathReport& v);

void to_json(Json& j, const NeighborhoodParams& v);
void from_json(const Json& j, NeighborhoodParams& v);
void to_json(Json& j, const ClusterAssignment& v);
void from_json(const Json& j, ClusterAssignment& v);
void to_json(Json& j, const ClusteringQuality& v);
void from_json(const Json& j, ClusteringQuality& v);
void to_json(Json& j, const SweepSummary& v);
void from_json(const Json& j, SweepSummary& v);

void to_json(Json& j, const ClusterProfile& v);
void from_json(const Json& j, ClusterProfile& v);
void to_json(Json& j, const ClusterAggregates& v);
void from_json(const Json& j, ClusterAggregates& v);
void to_json(Json& j, const ForecastRow& v);
void from_json(const Json& j, ForecastRow& v);
void to_json(Json& j, const ForecastSummary& v);
void from_json(const Json& j, ForecastSummary& v);
void to_json(Json& j, const ModelResult& v);
void from_json(const Json& j, ModelResult& v);
void to_json(Json& j, const PipelineReport& v);
void from_json(const Json& j, PipelineReport& v);

// Two-space indented JSON with a trailing newline; doubles use the shortest
// text that parses back to the same value, so save -> load -> save is
// byte-identical.
template <class Record>
std::string dump_report(const Record& record) {
    Json j = record;
    return j.dump(2) + "\n";
}

template <class Record>
void save_report(const Record& record, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    out << dump_report(record);
    if (!out) throw IoError("write failure on '" + file.string() + "'");
}

template <class Record>
Record load_report(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open '" + file.string() + "' for reading");
    try {
        return Json::parse(in).get<Record>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
}

}  // namespace clustreg
