/*******************************************************************************
* Copyright 2026 The rcbev Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <tuple>

#include "rcbev/errors.hpp"
#include "rcbev/radar.hpp"

namespace rcbev {
namespace {

constexpr std::array<const char*, 7> kColumns = {"x", "y", "z", "rcs", "vx", "vy", "sweep_offset"};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(trim(field));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_real(const std::string& text, std::size_t line_no, const char* column) {
    const std::string lowered = [&] {
        std::string s = text;
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        return s;
    }();
    if (lowered.find("nan") != std::string::npos || lowered.find("inf") != std::string::npos)
        throw DataError("radar CSV line " + std::to_string(line_no) + ": non-finite value in column '" + column + "'");
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec == std::errc::result_out_of_range)
        throw DataError("radar CSV line " + std::to_string(line_no) + ": value out of range in column '" + column + "'");
    if (ec != std::errc() || ptr != last)
        throw FormatError("radar CSV line " + std::to_string(line_no) + ": cannot parse '" + text + "' in column '" +
                          column + "'");
    return v;
}

void parse_comment(const std::string& line, PointCloud& cloud) {
    std::istringstream ss(line.substr(1));
    std::string token;
    while (ss >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const auto key = token.substr(0, eq);
        const auto value = token.substr(eq + 1);
        if (key == "frame") cloud.frame_id = value;
        else if (key == "compensated") cloud.compensated = (value == "true" || value == "1");
    }
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(b, 4);
}

void put_f32(std::ostream& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void validate_point(const RadarPoint& p) {
    const std::array<double, 7> fields = {p.x, p.y, p.z, p.rcs_dbsm, p.vx, p.vy, p.sweep_offset};
    for (std::size_t i = 0; i < fields.size(); ++i)
        if (!std::isfinite(fields[i]))
            throw DataError(std::string("radar point field '") + kColumns[i] + "' is not finite");
    if (p.sweep_offset > 0.0) throw DataError("radar point sweep_offset must be <= 0");
}

void PointCloud::canonicalize() {
    auto key = [](const RadarPoint& p) {
        return std::make_tuple(p.sweep_offset, p.x, p.y, p.z, p.rcs_dbsm, p.vx, p.vy);
    };
    std::stable_sort(points.begin(), points.end(),
                     [&](const RadarPoint& a, const RadarPoint& b) { return key(a) < key(b); });
}

void SweepTransform::validate() const {
    if (!std::isfinite(angle) || !std::isfinite(tx) || !std::isfinite(ty))
        throw DataError("sweep transform has non-finite fields");
    if (!(angle > -std::numbers::pi && angle <= std::numbers::pi))
        throw ConfigError("sweep transform angle must lie in (-pi, pi]");
}

void PointFeatureSet::validate() const {
    if (coords.rows() != features.rows() || rcs_norm.size() != features.rows())
        throw ShapeError("point feature set row counts disagree");
    for (double v : rcs_norm)
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("normalized RCS outside [0, 1]");
}

PointCloud parse_point_cloud_csv(std::istream& in) {
    PointCloud cloud;
    std::string line;
    std::size_t line_no = 0;
    std::array<std::size_t, 7> column_index{};
    std::size_t n_fields = 0;
    bool have_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            if (!have_header) parse_comment(t, cloud);
            continue;
        }
        if (!have_header) {
            const auto names = split(t, ',');
            n_fields = names.size();
            for (std::size_t c = 0; c < kColumns.size(); ++c) {
                auto it = std::find(names.begin(), names.end(), kColumns[c]);
                if (it == names.end())
                    throw FormatError(std::string("radar CSV header is missing column '") + kColumns[c] + "'");
                column_index[c] = static_cast<std::size_t>(it - names.begin());
            }
            have_header = true;
            continue;
        }
        const auto fields = split(t, ',');
        if (fields.size() != n_fields)
            throw FormatError("radar CSV line " + std::to_string(line_no) + ": expected " + std::to_string(n_fields) +
                              " fields, got " + std::to_string(fields.size()));
        std::array<double, 7> v{};
        for (std::size_t c = 0; c < kColumns.size(); ++c)
            v[c] = parse_real(fields[column_index[c]], line_no, kColumns[c]);
        RadarPoint p{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
        validate_point(p);
        cloud.points.push_back(p);
    }
    if (!have_header) throw FormatError("radar CSV has no header line");
    cloud.canonicalize();
    return cloud;
}

PointCloud load_point_cloud(const std::filesystem::path& path) {
    if (path.extension() == ".bin") return load_point_cloud_binary(path);
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open radar file " + path.string());
    return parse_point_cloud_csv(in);
}

void write_point_cloud_csv(std::ostream& out, const PointCloud& cloud) {
    out << "# frame=" << (cloud.frame_id.empty() ? "unnamed" : cloud.frame_id)
        << " compensated=" << (cloud.compensated ? "true" : "false") << "\n";
    out << "x,y,z,rcs,vx,vy,sweep_offset\n";
    for (const auto& p : cloud.points) {
        out << format_real(p.x) << ',' << format_real(p.y) << ',' << format_real(p.z) << ','
            << format_real(p.rcs_dbsm) << ',' << format_real(p.vx) << ',' << format_real(p.vy) << ','
            << format_real(p.sweep_offset) << "\n";
    }
}

void save_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
    if (path.extension() == ".bin") {
        save_point_cloud_binary(path, cloud);
        return;
    }
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write radar file " + path.string());
    write_point_cloud_csv(out, cloud);
}

void save_point_cloud_binary(const std::filesystem::path& path, const PointCloud& cloud) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write radar file " + path.string());
    put_u32(out, static_cast<std::uint32_t>(cloud.size()));
    for (const auto& p : cloud.points)
        for (double v : {p.x, p.y, p.z, p.rcs_dbsm, p.vx, p.vy, p.sweep_offset}) put_f32(out, v);
}

PointCloud load_point_cloud_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open radar file " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 4) throw FormatError("radar binary file is shorter than its count prefix");
    const std::uint32_t count = get_u32(bytes.data());
    if (bytes.size() != 4 + static_cast<std::size_t>(count) * 28)
        throw FormatError("radar binary file size " + std::to_string(bytes.size()) + " does not match " +
                          std::to_string(count) + " points");
    PointCloud cloud;
    cloud.points.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::array<double, 7> v{};
        for (std::size_t c = 0; c < 7; ++c)
            v[c] = static_cast<double>(std::bit_cast<float>(get_u32(bytes.data() + 4 + i * 28 + c * 4)));
        RadarPoint p{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
        validate_point(p);
        cloud.points.push_back(p);
    }
    cloud.canonicalize();
    return cloud;
}

PointCloud accumulate_sweeps(std::span<const std::pair<PointCloud, SweepTransform>> sweeps) {
    PointCloud out;
    for (const auto& [cloud, tf] : sweeps) {
        tf.validate();
        if (out.frame_id.empty()) out.frame_id = cloud.frame_id;
        out.compensated = out.compensated && cloud.compensated;
        const double c = std::cos(tf.angle), s = std::sin(tf.angle);
        for (RadarPoint p : cloud.points) {
            const double x = p.x, y = p.y;
            p.x = c * x - s * y + tf.tx;
            p.y = s * x + c * y + tf.ty;
            const double vx = p.vx, vy = p.vy;
            p.vx = c * vx - s * vy;
            p.vy = s * vx + c * vy;
            out.points.push_back(p);
        }
    }
    out.canonicalize();
    return out;
}

PointCloud filter_roi(const PointCloud& cloud, const BevSpec& spec) {
    PointCloud out;
    out.frame_id = cloud.frame_id;
    out.compensated = cloud.compensated;
    for (const auto& p : cloud.points)
        if (spec.contains(p.x, p.y)) out.points.push_back(p);
    return out;
}

double normalize_rcs(double rcs_dbsm, RcsBounds bounds) {
    if (!(bounds.lo < bounds.hi)) throw ConfigError("RCS bounds require lo < hi");
    return std::clamp((rcs_dbsm - bounds.lo) / (bounds.hi - bounds.lo), 0.0, 1.0);
}

PointFeatureSet assemble_features(const PointCloud& cloud, const BevSpec& spec, RcsBounds bounds) {
    PointFeatureSet out;
    const std::size_t n = cloud.size();
    out.features = Matrix(n, PointFeatureSet::kChannels);
    out.coords = Matrix(n, 2);
    out.rcs_norm.resize(n);
    const double extent_x = spec.x_max - spec.x_min;
    const double extent_y = spec.y_max - spec.y_min;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = cloud.points[i];
        if (!spec.contains(p.x, p.y))
            throw ContractError("assemble_features: point " + std::to_string(i) + " lies outside the ROI");
        const double r = normalize_rcs(p.rcs_dbsm, bounds);
        auto row = out.features.row(i);
        row[0] = (p.x - spec.x_min) / extent_x;
        row[1] = (p.y - spec.y_min) / extent_y;
        row[2] = p.z;
        row[3] = r;
        row[4] = p.vx;
        row[5] = p.vy;
        row[6] = p.sweep_offset;
        out.coords(i, 0) = p.x;
        out.coords(i, 1) = p.y;
        out.rcs_norm[i] = r;
    }
    return out;
}

}  // namespace rcbev
