#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nisekit/nise.hpp"
#include "nisekit/spectral_density.hpp"

namespace nisekit {

/// Flat sectioned key-value document:
///
///   [section]
///   key_with_units = value   # trailing comments allowed
///
/// Order is preserved; parse -> serialize -> parse is the identity.
class ConfigDoc {
public:
    struct Entry {
        std::string key;
        std::string value;
        std::size_t line = 0;
    };
    struct Section {
        std::string name;
        std::vector<Entry> entries;
        std::size_t line = 0;
    };

    static ConfigDoc parse_file(const std::filesystem::path& path);
    static ConfigDoc parse_string(const std::string& text, const std::string& origin = "<string>");

    std::string serialize() const;
    std::uint64_t hash() const;

    const std::string* find(const std::string& section, const std::string& key) const;
    std::string require(const std::string& section, const std::string& key) const;
    double require_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    std::uint64_t require_u64(const std::string& section, const std::string& key) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;

    const std::vector<Section>& sections() const { return sections_; }
    const std::string& origin() const { return origin_; }

private:
    std::string locate(const std::string& section, const std::string& key) const;
    std::vector<Section> sections_;
    std::string origin_;
};

/// Validated, typed run configuration shared by gen-noise / propagate /
/// absorption. Paths are resolved relative to the config file's directory.
struct RunConfig {
    // system
    Eigen::MatrixXd hamiltonian;                      // empty for gen-noise without one
    std::filesystem::path dipoles_csv;
    // bath
    std::vector<SpectralDensity> site_models;         // one per site
    // run
    double temperature_K = 300.0;
    double dt_fs = 0.0;
    std::size_t n_steps = 0;
    std::size_t n_realizations = 0;
    PropagationMode mode = PropagationMode::nise;
    DensitySeries::Averaging averaging = DensitySeries::Averaging::plain;
    double interpolation_factor = 5.0;
    double eps_floor = 1e-10;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::size_t initial_site = 0;                     // zero-based
    double resample_dt_fs = 0.0;                      // 0: no resampling
    // noise from file instead of generated
    std::filesystem::path noise_csv;
    double window_len_fs = 0.0;
    double stride_fs = 0.0;
    // output
    std::filesystem::path out_dir = ".";
    std::string prefix = "run";
    bool write_density = false;
    // absorption presentation
    bool normalize = false;
    double shift_cm1 = 0.0;
    std::filesystem::path align_to_csv;
    bool subtract_mean_site_energy = false;
    bool apodize = false;

    std::uint64_t config_hash = 0;

    std::size_t n_sites() const { return site_models.size(); }
};

enum class Command { gen_noise, propagate, absorption };

RunConfig load_run_config(const ConfigDoc& doc, Command command);
RunConfig load_run_config_file(const std::filesystem::path& path, Command command);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nisekit
