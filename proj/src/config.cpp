#include "nisekit/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nisekit/csv.hpp"
#include "nisekit/errors.hpp"
#include "nisekit/units.hpp"

namespace nisekit {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
    auto pos = s.find('#');
    return pos == std::string::npos ? s : s.substr(0, pos);
}

}  // namespace

ConfigDoc ConfigDoc::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path.string());
}

ConfigDoc ConfigDoc::parse_string(const std::string& text, const std::string& origin) {
    ConfigDoc doc;
    doc.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    Section* current = nullptr;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header");
            Section sec;
            sec.name = trim(s.substr(1, s.size() - 2));
            sec.line = line_no;
            if (sec.name.empty())
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty section name");
            doc.sections_.push_back(std::move(sec));
            current = &doc.sections_.back();
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        if (!current)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": key outside of any [section]");
        Entry e;
        e.key = trim(s.substr(0, eq));
        e.value = trim(s.substr(eq + 1));
        e.line = line_no;
        if (e.key.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        for (const auto& other : current->entries) {
            if (other.key == e.key)
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + e.key +
                                  "' in [" + current->name + "]");
        }
        current->entries.push_back(std::move(e));
    }
    return doc;
}

std::string ConfigDoc::serialize() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& sec : sections_) {
        if (!first) os << "\n";
        first = false;
        os << "[" << sec.name << "]\n";
        for (const auto& e : sec.entries) os << e.key << " = " << e.value << "\n";
    }
    return os.str();
}

std::uint64_t ConfigDoc::hash() const { return csv::fnv1a(serialize()); }

const std::string* ConfigDoc::find(const std::string& section, const std::string& key) const {
    for (const auto& sec : sections_) {
        if (sec.name != section) continue;
        for (const auto& e : sec.entries) {
            if (e.key == key) return &e.value;
        }
    }
    return nullptr;
}

std::string ConfigDoc::locate(const std::string& section, const std::string& key) const {
    return origin_ + ": [" + section + "] " + key;
}

std::string ConfigDoc::require(const std::string& section, const std::string& key) const {
    const std::string* v = find(section, key);
    if (!v) throw ConfigError(locate(section, key) + " is required but missing");
    return *v;
}

double ConfigDoc::require_double(const std::string& section, const std::string& key) const {
    const std::string v = require(section, key);
    errno = 0;
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError(locate(section, key) + ": cannot parse number '" + v + "'");
    return d;
}

double ConfigDoc::get_double(const std::string& section, const std::string& key, double fallback) const {
    return find(section, key) ? require_double(section, key) : fallback;
}

std::uint64_t ConfigDoc::require_u64(const std::string& section, const std::string& key) const {
    const std::string v = require(section, key);
    errno = 0;
    char* end = nullptr;
    unsigned long long u = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError(locate(section, key) + ": cannot parse integer '" + v + "'");
    return u;
}

std::uint64_t ConfigDoc::get_u64(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
    return find(section, key) ? require_u64(section, key) : fallback;
}

bool ConfigDoc::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(locate(section, key) + ": expected a boolean, got '" + *v + "'");
}

std::string ConfigDoc::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
    const std::string* v = find(section, key);
    return v ? *v : fallback;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute()) return path;
    return base / path;
}

SpectralDensity bath_model_from_doc(const ConfigDoc& doc, const std::filesystem::path& base) {
    const std::string kind = doc.get_string("bath", "sd_kind", "drude_lorentz");
    SpectralDensity model = [&] {
        if (kind == "tabulated") {
            return SpectralDensity::read_csv(resolve(base, doc.require("bath", "sd_csv")));
        }
        if (kind != "drude_lorentz")
            throw ConfigError(doc.origin() + ": [bath] sd_kind must be drude_lorentz or tabulated");
        const auto n_peaks = static_cast<std::size_t>(doc.require_u64("bath", "n_peaks"));
        std::vector<DrudeLorentzPeak> peaks(n_peaks);
        for (std::size_t k = 0; k < n_peaks; ++k) {
            const std::string tag = "peak" + std::to_string(k + 1);
            peaks[k].omega0_cm1 = doc.require_double("bath", tag + "_omega_cm1");
            peaks[k].lambda_cm1 = doc.require_double("bath", tag + "_lambda_cm1");
            if (doc.find("bath", tag + "_nu_cm1")) {
                peaks[k].nu_cm1 = doc.require_double("bath", tag + "_nu_cm1");
            } else {
                peaks[k].nu_cm1 = units::width_from_time_fs(doc.require_double("bath", tag + "_width_fs"));
            }
        }
        try {
            return SpectralDensity::drude_lorentz(std::move(peaks));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(doc.origin() + ": [bath] " + e.what());
        }
    }();
    if (doc.find("bath", "rescale_lambda_cm1")) {
        try {
            model = model.rescaled_to(doc.require_double("bath", "rescale_lambda_cm1"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(doc.origin() + ": [bath] rescale_lambda_cm1: " + e.what());
        }
    }
    return model;
}

}  // namespace

RunConfig load_run_config(const ConfigDoc& doc, Command command) {
    RunConfig cfg;
    cfg.config_hash = doc.hash();
    const std::filesystem::path base =
        doc.origin() == "<string>" ? std::filesystem::path(".")
                                   : std::filesystem::path(doc.origin()).parent_path();

    std::size_t n_sites = static_cast<std::size_t>(doc.get_u64("bath", "n_sites", 1));
    if (command != Command::gen_noise || doc.find("system", "hamiltonian_csv")) {
        cfg.hamiltonian = read_hamiltonian_csv(resolve(base, doc.require("system", "hamiltonian_csv")));
        n_sites = static_cast<std::size_t>(cfg.hamiltonian.rows());
    }

    SpectralDensity shared = bath_model_from_doc(doc, base);
    cfg.site_models.reserve(n_sites);
    for (std::size_t n = 0; n < n_sites; ++n) {
        const std::string key = "site" + std::to_string(n + 1) + "_sd_csv";
        if (doc.find("bath", key)) {
            cfg.site_models.push_back(SpectralDensity::read_csv(resolve(base, doc.require("bath", key))));
        } else {
            cfg.site_models.push_back(shared);
        }
    }

    cfg.temperature_K = doc.require_double("run", "temperature_K");
    if (!(cfg.temperature_K > 0.0)) throw ConfigError(doc.origin() + ": [run] temperature_K must be > 0");
    cfg.dt_fs = doc.require_double("run", "dt_fs");
    if (!(cfg.dt_fs > 0.0)) throw ConfigError(doc.origin() + ": [run] dt_fs must be > 0");
    cfg.n_steps = static_cast<std::size_t>(doc.require_u64("run", "n_steps"));
    if (cfg.n_steps < 2) throw ConfigError(doc.origin() + ": [run] n_steps must be >= 2");
    cfg.n_realizations = static_cast<std::size_t>(doc.require_u64("run", "n_realizations"));
    if (cfg.n_realizations < 1) throw ConfigError(doc.origin() + ": [run] n_realizations must be >= 1");

    // All randomness flows from this one seed; no implicit time-based default.
    cfg.seed = doc.require_u64("run", "seed");
    cfg.workers = static_cast<unsigned>(doc.get_u64("run", "workers", 1));
    if (cfg.workers == 0) throw ConfigError(doc.origin() + ": [run] workers must be >= 1");

    const std::string mode = doc.get_string("run", "mode", "nise");
    if (mode == "nise") {
        cfg.mode = PropagationMode::nise;
    } else if (mode == "tnise") {
        cfg.mode = PropagationMode::tnise;
    } else {
        throw ConfigError(doc.origin() + ": [run] mode must be nise or tnise");
    }
    const std::string avg = doc.get_string("run", "averaging", "plain");
    if (avg == "plain") {
        cfg.averaging = DensitySeries::Averaging::plain;
    } else if (avg == "constructed") {
        cfg.averaging = DensitySeries::Averaging::constructed;
    } else if (avg == "interpolated") {
        cfg.averaging = DensitySeries::Averaging::interpolated;
    } else {
        throw ConfigError(doc.origin() + ": [run] averaging must be plain, constructed or interpolated");
    }
    cfg.interpolation_factor = doc.get_double("run", "interpolation_factor", 5.0);
    if (!(cfg.interpolation_factor > 0.0))
        throw ConfigError(doc.origin() + ": [run] interpolation_factor must be > 0");
    cfg.eps_floor = doc.get_double("run", "eps_floor", 1e-10);
    cfg.resample_dt_fs = doc.get_double("run", "resample_dt_fs", 0.0);

    const std::uint64_t site = doc.get_u64("run", "initial_site", 1);
    if (site < 1 || site > n_sites)
        throw ConfigError(doc.origin() + ": [run] initial_site out of range 1.." + std::to_string(n_sites));
    cfg.initial_site = static_cast<std::size_t>(site - 1);

    if (doc.find("run", "noise_csv")) {
        cfg.noise_csv = resolve(base, doc.require("run", "noise_csv"));
        if (!std::filesystem::exists(cfg.noise_csv))
            throw ConfigError(doc.origin() + ": [run] noise_csv does not exist: " + cfg.noise_csv.string());
        cfg.window_len_fs = doc.get_double("run", "window_len_fs", 0.0);
        cfg.stride_fs = doc.get_double("run", "stride_fs", 0.0);
    }

    if (command == Command::absorption) {
        cfg.dipoles_csv = resolve(base, doc.require("system", "dipoles_csv"));
        if (!std::filesystem::exists(cfg.dipoles_csv))
            throw ConfigError(doc.origin() + ": [system] dipoles_csv does not exist: " +
                              cfg.dipoles_csv.string());
        cfg.normalize = doc.get_bool("absorption", "normalize", false);
        cfg.shift_cm1 = doc.get_double("absorption", "shift_cm1", 0.0);
        cfg.subtract_mean_site_energy = doc.get_bool("absorption", "subtract_mean_site_energy", false);
        cfg.apodize = doc.get_bool("absorption", "apodize", false);
        if (doc.find("absorption", "align_to_csv"))
            cfg.align_to_csv = resolve(base, doc.require("absorption", "align_to_csv"));
    }

    cfg.out_dir = resolve(base, doc.get_string("output", "out_dir", "."));
    cfg.prefix = doc.get_string("output", "prefix", "run");
    cfg.write_density = doc.get_bool("output", "write_density", false);
    return cfg;
}

RunConfig load_run_config_file(const std::filesystem::path& path, Command command) {
    return load_run_config(ConfigDoc::parse_file(path), command);
}

}  // namespace nisekit
