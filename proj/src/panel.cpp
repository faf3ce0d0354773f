#include "clustreg/panel.hpp"

#include "clustreg/csv.hpp"
#include "clustreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_map>

namespace clustreg {

namespace {

template <class T>
void require_unique(const std::vector<T>& names, const char* what) {
    std::set<T> seen;
    for (const auto& n : names) {
        if constexpr (std::is_same_v<T, std::string>) {
            if (n.empty()) throw DomainError(std::string("empty ") + what + " name");
        }
        if (!seen.insert(n).second) {
            std::ostringstream msg;
            msg << "duplicate " << what << " '" << n << "'";
            throw DomainError(msg.str());
        }
    }
}

template <class T>
std::size_t find_index(const std::vector<T>& names, const T& key, const char* what) {
    auto it = std::find(names.begin(), names.end(), key);
    if (it == names.end()) {
        std::ostringstream msg;
        msg << "unknown " << what << " '" << key << "'";
        throw DomainError(msg.str());
    }
    return static_cast<std::size_t>(it - names.begin());
}

// Keeps first-appearance order of names while handing out dense indices.
class NameIndex {
public:
    std::size_t intern(const std::string& name) {
        auto [it, inserted] = index_.emplace(name, names_.size());
        if (inserted) names_.push_back(name);
        return it->second;
    }
    std::vector<std::string> names() const { return names_; }

private:
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> names_;
};

struct Cell {
    int year;
    std::size_t entity;
    std::size_t feature;
    double value;
    std::string origin;
};

EnergyPanel assemble(const std::vector<Cell>& cells, const NameIndex& entities,
                     const NameIndex& features) {
    std::set<int> year_set;
    for (const auto& c : cells) year_set.insert(c.year);
    std::vector<int> years(year_set.begin(), year_set.end());
    auto panel = EnergyPanel::zeros(years, entities.names(), features.names());
    std::map<std::tuple<int, std::size_t, std::size_t>, const Cell*> seen;
    for (const auto& c : cells) {
        auto [it, inserted] = seen.emplace(std::make_tuple(c.year, c.entity, c.feature), &c);
        if (!inserted) {
            throw FormatError("duplicate key (" + std::to_string(c.year) + ", " +
                              panel.entities()[c.entity] + ", " + panel.features()[c.feature] +
                              ") at " + it->second->origin + " and " + c.origin);
        }
        panel(panel.year_index(c.year), c.entity, c.feature) = c.value;
    }
    return panel;
}

std::string where(const std::string& file, std::size_t line, std::size_t column) {
    return file + ":" + std::to_string(line) + ":" + std::to_string(column);
}

EnergyPanel load_long(const std::filesystem::path& path) {
    const std::string file = path.string();
    auto records = csv::read_file(file);
    if (records.empty()) throw FormatError(file + ": missing header");
    const csv::Row expected{"year", "entity", "feature", "value"};
    if (records.front().fields != expected) {
        throw FormatError(where(file, records.front().line, 1) +
                          ": header must be exactly 'year,entity,feature,value'");
    }
    if (records.size() == 1) throw FormatError(file + ": no data rows");

    NameIndex entities, features;
    std::vector<Cell> cells;
    cells.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != 4) {
            throw FormatError(where(file, rec.line, 1) + ": expected 4 fields, found " +
                              std::to_string(rec.fields.size()));
        }
        long long year = 0;
        if (!csv::parse_int(rec.fields[0], year)) {
            throw FormatError(where(file, rec.line, 1) + ": non-integer year '" + rec.fields[0] + "'");
        }
        if (rec.fields[1].empty()) throw FormatError(where(file, rec.line, 2) + ": empty entity name");
        if (rec.fields[2].empty()) throw FormatError(where(file, rec.line, 3) + ": empty feature name");
        double value = 0.0;
        if (!csv::parse_double(rec.fields[3], value)) {
            throw FormatError(where(file, rec.line, 4) + ": non-numeric value '" + rec.fields[3] + "'");
        }
        cells.push_back({static_cast<int>(year), entities.intern(rec.fields[1]),
                         features.intern(rec.fields[2]), value, file + ":" + std::to_string(rec.line)});
    }
    return assemble(cells, entities, features);
}

EnergyPanel load_wide(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
    static const std::regex pattern(R"(panel_(-?\d+)\.csv)");
    std::map<int, fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && std::regex_match(name, m, pattern)) {
            files.emplace(std::stoi(m[1].str()), entry.path());
        }
    }
    if (files.empty()) throw FormatError(dir.string() + ": no panel_<year>.csv files");

    NameIndex entities, features;
    std::vector<Cell> cells;
    for (const auto& [year, path] : files) {
        const std::string file = path.string();
        auto records = csv::read_file(file);
        if (records.empty()) throw FormatError(file + ": missing header");
        const auto& header = records.front().fields;
        if (header.size() < 2 || header[0] != "entity") {
            throw FormatError(where(file, records.front().line, 1) +
                              ": header must be 'entity,<feature...>'");
        }
        std::vector<std::size_t> feature_ids;
        for (std::size_t c = 1; c < header.size(); ++c) {
            if (header[c].empty()) {
                throw FormatError(where(file, records.front().line, c + 1) + ": empty feature name");
            }
            feature_ids.push_back(features.intern(header[c]));
        }
        if (records.size() == 1) throw FormatError(file + ": no data rows");
        for (std::size_t r = 1; r < records.size(); ++r) {
            const auto& rec = records[r];
            if (rec.fields.size() != header.size()) {
                throw FormatError(where(file, rec.line, 1) + ": expected " +
                                  std::to_string(header.size()) + " fields, found " +
                                  std::to_string(rec.fields.size()));
            }
            if (rec.fields[0].empty()) throw FormatError(where(file, rec.line, 1) + ": empty entity name");
            const std::size_t e = entities.intern(rec.fields[0]);
            for (std::size_t c = 1; c < rec.fields.size(); ++c) {
                double value = 0.0;
                if (!csv::parse_double(rec.fields[c], value)) {
                    throw FormatError(where(file, rec.line, c + 1) + ": non-numeric value '" +
                                      rec.fields[c] + "'");
                }
                cells.push_back({year, e, feature_ids[c - 1], value,
                                 file + " row " + std::to_string(rec.line)});
            }
        }
    }
    return assemble(cells, entities, features);
}

}  // namespace

EnergyPanel::EnergyPanel(std::vector<int> years, std::vector<std::string> entities,
                         std::vector<std::string> features, std::vector<double> values)
    : years_(std::move(years)),
      entities_(std::move(entities)),
      features_(std::move(features)),
      values_(std::move(values)) {
    if (values_.size() != years_.size() * entities_.size() * features_.size()) {
        throw DomainError("panel value count does not match axis extents");
    }
    for (std::size_t i = 1; i < years_.size(); ++i) {
        if (years_[i] <= years_[i - 1]) throw DomainError("panel years must be strictly increasing");
    }
    require_unique(entities_, "entity");
    require_unique(features_, "feature");
}

EnergyPanel EnergyPanel::zeros(std::vector<int> years, std::vector<std::string> entities,
                               std::vector<std::string> features) {
    const std::size_t n = years.size() * entities.size() * features.size();
    return EnergyPanel(std::move(years), std::move(entities), std::move(features),
                       std::vector<double>(n, 0.0));
}

double EnergyPanel::at(int year, const std::string& entity, const std::string& feature) const {
    return (*this)(year_index(year), entity_index(entity), feature_index(feature));
}

std::size_t EnergyPanel::year_index(int year) const { return find_index(years_, year, "year"); }

std::size_t EnergyPanel::entity_index(const std::string& name) const {
    return find_index(entities_, name, "entity");
}

std::size_t EnergyPanel::feature_index(const std::string& name) const {
    return find_index(features_, name, "feature");
}

double EnergyPanel::entity_total(std::size_t year, std::size_t entity) const {
    double total = 0.0;
    for (std::size_t f = 0; f < features_.size(); ++f) total += (*this)(year, entity, f);
    return total;
}

PanelLayout parse_layout(const std::string& text) {
    if (text == "long") return PanelLayout::long_format;
    if (text == "wide") return PanelLayout::wide;
    throw FormatError("unknown panel layout '" + text + "' (expected long or wide)");
}

std::string to_string(PanelLayout layout) {
    return layout == PanelLayout::long_format ? "long" : "wide";
}

EnergyPanel load_panel(const std::filesystem::path& path, PanelLayout layout) {
    if (!std::filesystem::exists(path)) throw IoError("'" + path.string() + "' does not exist");
    return layout == PanelLayout::long_format ? load_long(path) : load_wide(path);
}

ValidationReport validate_panel(const EnergyPanel& panel) {
    ValidationReport report;
    const auto& years = panel.years();
    const auto& entities = panel.entities();
    const auto& features = panel.features();
    for (std::size_t y = 0; y < years.size(); ++y) {
        for (std::size_t e = 0; e < entities.size(); ++e) {
            for (std::size_t f = 0; f < features.size(); ++f) {
                const double v = panel(y, e, f);
                std::string location;
                if (!std::isfinite(v) || v < 0) {
                    location = "(" + std::to_string(years[y]) + ", " + entities[e] + ", " + features[f] + ")";
                }
                if (!std::isfinite(v)) {
                    report.issues.push_back({Severity::error, location, "non-finite value"});
                } else if (v < 0) {
                    report.issues.push_back(
                        {Severity::error, location, "negative value " + csv::format_double(v)});
                }
            }
        }
    }
    for (std::size_t f = 0; f < features.size(); ++f) {
        bool all_zero = true;
        for (std::size_t y = 0; y < years.size() && all_zero; ++y) {
            for (std::size_t e = 0; e < entities.size() && all_zero; ++e) all_zero = panel(y, e, f) == 0.0;
        }
        if (all_zero) {
            report.issues.push_back({Severity::warning, "feature " + features[f],
                                     "feature '" + features[f] + "' is zero for all years and entities"});
        }
    }
    for (std::size_t e = 0; e < entities.size(); ++e) {
        bool all_zero = true;
        for (std::size_t y = 0; y < years.size() && all_zero; ++y) {
            for (std::size_t f = 0; f < features.size() && all_zero; ++f) all_zero = panel(y, e, f) == 0.0;
        }
        if (all_zero) {
            report.issues.push_back({Severity::warning, "entity " + entities[e],
                                     "entity '" + entities[e] + "' is zero for all years and features"});
        }
    }
    report.ok = std::none_of(report.issues.begin(), report.issues.end(),
                             [](const ValidationIssue& i) { return i.severity == Severity::error; });
    return report;
}

void save_panel_long(const EnergyPanel& panel, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    csv::write_row(out, {"year", "entity", "feature", "value"});
    for (std::size_t y = 0; y < panel.num_years(); ++y) {
        for (std::size_t e = 0; e < panel.num_entities(); ++e) {
            for (std::size_t f = 0; f < panel.num_features(); ++f) {
                csv::write_row(out, {std::to_string(panel.years()[y]), panel.entities()[e],
                                     panel.features()[f], csv::format_double(panel(y, e, f))});
            }
        }
    }
    if (!out) throw IoError("write failure on '" + file.string() + "'");
}

void save_panel_wide(const EnergyPanel& panel, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t y = 0; y < panel.num_years(); ++y) {
        const auto file = dir / ("panel_" + std::to_string(panel.years()[y]) + ".csv");
        std::ofstream out(file, std::ios::binary);
        if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
        csv::Row header{"entity"};
        header.insert(header.end(), panel.features().begin(), panel.features().end());
        csv::write_row(out, header);
        for (std::size_t e = 0; e < panel.num_entities(); ++e) {
            csv::Row row{panel.entities()[e]};
            for (std::size_t f = 0; f < panel.num_features(); ++f) {
                row.push_back(csv::format_double(panel(y, e, f)));
            }
            csv::write_row(out, row);
        }
        if (!out) throw IoError("write failure on '" + file.string() + "'");
    }
}

}  // namespace clustreg
