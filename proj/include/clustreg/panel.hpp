#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace clustreg {

// Dense years x entities x features panel of emission values (Mt CO2).
//
// Construction checks extents, strictly increasing years and unique,
// non-empty names. Value signs and finiteness are not enforced here so that
// a loaded file can still be inspected by validate_panel; every analysis
// entry point validates before use.
class EnergyPanel {
public:
    EnergyPanel() = default;
    EnergyPanel(std::vector<int> years, std::vector<std::string> entities,
                std::vector<std::string> features, std::vector<double> values);

    // Zero-filled panel with the given axes.
    static EnergyPanel zeros(std::vector<int> years, std::vector<std::string> entities,
                             std::vector<std::string> features);

    const std::vector<int>& years() const noexcept { return years_; }
    const std::vector<std::string>& entities() const noexcept { return entities_; }
    const std::vector<std::string>& features() const noexcept { return features_; }
    const std::vector<double>& values() const noexcept { return values_; }

    std::size_t num_years() const noexcept { return years_.size(); }
    std::size_t num_entities() const noexcept { return entities_.size(); }
    std::size_t num_features() const noexcept { return features_.size(); }

    double operator()(std::size_t year, std::size_t entity, std::size_t feature) const {
        return values_[index(year, entity, feature)];
    }
    double& operator()(std::size_t year, std::size_t entity, std::size_t feature) {
        return values_[index(year, entity, feature)];
    }

    // Lookup by labels; throws DomainError when a label is unknown.
    double at(int year, const std::string& entity, const std::string& feature) const;

    std::size_t year_index(int year) const;
    std::size_t entity_index(const std::string& name) const;
    std::size_t feature_index(const std::string& name) const;

    // Sum over features of one entity in one year.
    double entity_total(std::size_t year, std::size_t entity) const;

    bool operator==(const EnergyPanel&) const = default;

private:
    std::size_t index(std::size_t y, std::size_t e, std::size_t f) const noexcept {
        return (y * entities_.size() + e) * features_.size() + f;
    }

    std::vector<int> years_;
    std::vector<std::string> entities_;
    std::vector<std::string> features_;
    std::vector<double> values_;
};

enum class Severity { warning, error };

struct ValidationIssue {
    Severity severity = Severity::error;
    std::string location;
    std::string message;

    bool operator==(const ValidationIssue&) const = default;
};

struct ValidationReport {
    bool ok = true;
    std::vector<ValidationIssue> issues;

    bool operator==(const ValidationReport&) const = default;
};

enum class PanelLayout { long_format, wide };

PanelLayout parse_layout(const std::string& text);
std::string to_string(PanelLayout layout);

// Long layout: one CSV with header `year,entity,feature,value`; absent cells
// are zero. Wide layout: `path` is a directory of `panel_<year>.csv` files,
// each with header `entity,<feature...>`.
EnergyPanel load_panel(const std::filesystem::path& path, PanelLayout layout);

ValidationReport validate_panel(const EnergyPanel& panel);

// Writers emit panel order so that both layouts load back to the same panel.
void save_panel_long(const EnergyPanel& panel, const std::filesystem::path& file);
void save_panel_wide(const EnergyPanel& panel, const std::filesystem::path& dir);

}  // namespace clustreg
