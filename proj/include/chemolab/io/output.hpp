#pragma once

#include "chemolab/errors.hpp"
#include "chemolab/trajectory.hpp"

#include "json.hpp"
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace chemolab::io {

#ifndef CHEMOLAB_VERSION
#define CHEMOLAB_VERSION "0.1.0"
#endif

inline std::string to_hex(const unsigned char* p, std::size_t n) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(2 * n, '0');
    for (std::size_t k = 0; k < n; ++k) {
        out[2 * k] = digits[p[k] >> 4];
        out[2 * k + 1] = digits[p[k] & 0xf];
    }
    return out;
}

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    return to_hex(md, len);
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string sha256_file(const std::filesystem::path& p) { return sha256_hex(read_file(p)); }

/// printf-style "%.17g".
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Header lines then nx*ny values, row-major (x fastest), one per line.
inline std::string format_snapshot(const Field& f, const std::string& name, double t,
                                   const std::string& config_hash) {
    const Grid& g = f.grid();
    std::string o;
    o.reserve(g.size() * 26 + 256);
    o += "# time " + g17(t) + "\n";
    o += "# nx " + std::to_string(g.nx()) + "\n";
    o += "# ny " + std::to_string(g.ny()) + "\n";
    o += "# Lx " + g17(g.domain().lx) + "\n";
    o += "# Ly " + g17(g.domain().ly) + "\n";
    o += "# field " + name + "\n";
    o += "# config_sha256 " + config_hash + "\n";
    for (std::size_t k = 0; k < g.size(); ++k) {
        o += g17(f[k]);
        o += '\n';
    }
    return o;
}

/// Parsed snapshot file.
struct SnapshotFile {
    double time = 0.0;
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;
    std::string field;
    std::vector<double> values;
};

inline SnapshotFile parse_snapshot(const std::string& text) {
    SnapshotFile s;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream h(line.substr(1));
            std::string key;
            h >> key;
            if (key == "time") h >> s.time;
            else if (key == "nx") h >> s.nx;
            else if (key == "ny") h >> s.ny;
            else if (key == "Lx") h >> s.lx;
            else if (key == "Ly") h >> s.ly;
            else if (key == "field") h >> s.field;
            continue;
        }
        try {
            s.values.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw ParseError("snapshot line " + std::to_string(n) + ": not a number", n, "value");
        }
    }
    if (s.nx <= 0 || s.ny <= 0 || s.values.size() != static_cast<std::size_t>(s.nx) * s.ny) {
        throw ParseError("snapshot size does not match its header", 0, "nx");
    }
    return s;
}

/// Tab-separated series with a '#' header naming the columns.
class SeriesWriter {
public:
    SeriesWriter(bool with_phi, std::vector<std::pair<int, int>> modes)
        : phi_(with_phi), modes_(std::move(modes)) {}

    std::string header() const {
        std::string h = "# t\tm_min\tm_max\tc_min\tc_max\td_min\td_max\tm_l1\tc_l1\td_l1"
                        "\tm_sup\tc_w1inf\td_sup";
        if (phi_) h += "\tphi";
        for (const auto& [p, q] : modes_) h += "\tm_" + std::to_string(p) + "_" + std::to_string(q);
        return h + "\n";
    }

    std::string row(const SeriesRow& r) const {
        std::string o = g17(r.t);
        for (double v : {r.m_min, r.m_max, r.c_min, r.c_max, r.d_min, r.d_max, r.m_l1, r.c_l1,
                         r.d_l1, r.m_sup, r.c_w1inf, r.d_sup}) {
            o += '\t';
            o += g17(v);
        }
        if (phi_) {
            o += '\t';
            o += g17(r.phi);
        }
        for (double a : r.mode_amps) {
            o += '\t';
            o += g17(a);
        }
        return o + "\n";
    }

private:
    bool phi_;
    std::vector<std::pair<int, int>> modes_;
};

struct ManifestEntry {
    std::string path;   ///< relative to the run directory
    std::string sha256;
};

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = CHEMOLAB_VERSION;
    std::string solver;
    std::string started;
    std::string finished;
    std::string status = "ok";
    std::vector<ManifestEntry> files;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["config_sha256"] = config_hash;
        j["seed"] = seed;
        j["version"] = version;
        j["solver"] = solver;
        j["started"] = started;
        j["finished"] = finished;
        j["status"] = status;
        j["files"] = nlohmann::json::array();
        for (const auto& f : files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}});
        return j;
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        try {
            m.config_hash = j.at("config_sha256").get<std::string>();
            m.seed = j.at("seed").get<std::uint64_t>();
            m.version = j.at("version").get<std::string>();
            m.solver = j.value("solver", "");
            m.started = j.at("started").get<std::string>();
            m.finished = j.at("finished").get<std::string>();
            m.status = j.value("status", "ok");
            for (const auto& f : j.at("files")) {
                m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("manifest: ") + e.what(), 0, "manifest");
        }
        return m;
    }
};

/// Writes files into one directory and records each in the manifest.
class RunDirectory {
public:
    explicit RunDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& path() const noexcept { return dir_; }
    RunManifest& manifest() noexcept { return manifest_; }

    void write(const std::string& name, const std::string& bytes) {
        const auto p = dir_ / name;
        {
            std::ofstream out(p, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot write " + p.string());
            out << bytes;
        }
        record(name, bytes);
    }

    /// Records a file written incrementally elsewhere.
    void record_existing(const std::string& name) { record(name, read_file(dir_ / name)); }

    void write_manifest() {
        std::ofstream out(dir_ / "manifest.json", std::ios::trunc);
        if (!out) throw Error("cannot write manifest");
        out << manifest_.to_json().dump(2) << "\n";
    }

private:
    void record(const std::string& name, const std::string& bytes) {
        for (auto& f : manifest_.files) {
            if (f.path == name) {
                f.sha256 = sha256_hex(bytes);
                return;
            }
        }
        manifest_.files.push_back({name, sha256_hex(bytes)});
    }

    std::filesystem::path dir_;
    RunManifest manifest_;
};

struct VerifyReport {
    std::size_t checked = 0;
    std::vector<std::string> missing;
    std::vector<std::string> mismatched;
    bool ok() const { return missing.empty() && mismatched.empty(); }
};

/// Recomputes the hash of every file listed in dir/manifest.json.
inline VerifyReport verify_run(const std::filesystem::path& dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what(), 0, "manifest");
    }
    const auto m = RunManifest::from_json(j);
    VerifyReport r;
    for (const auto& f : m.files) {
        const auto p = dir / f.path;
        ++r.checked;
        if (!std::filesystem::exists(p)) {
            r.missing.push_back(f.path);
        } else if (sha256_file(p) != f.sha256) {
            r.mismatched.push_back(f.path);
        }
    }
    return r;
}

}  // namespace chemolab::io
