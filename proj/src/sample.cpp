#include "funcmax/sample.hpp"

#include "funcmax/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>
#include <string_view>
#include <unordered_map>

namespace funcmax {

// ---------------------------------------------------------------------------
// Grids

TimeGrid TimeGrid::uniform(std::size_t count) {
    if (count == 0) throw GridError("time grid must contain at least one point");
    std::vector<double> pts(count);
    for (std::size_t l = 0; l < count; ++l)
        pts[l] = static_cast<double>(l + 1) / static_cast<double>(count);
    return TimeGrid(std::move(pts), Kind::uniform);
}

TimeGrid TimeGrid::from_points(std::vector<double> points) {
    if (points.empty()) throw GridError("time grid must contain at least one point");
    for (std::size_t l = 0; l < points.size(); ++l) {
        const double p = points[l];
        if (!std::isfinite(p) || p < 0.0 || p > 1.0)
            throw GridError("time point " + std::to_string(l + 1) + " outside [0, 1]");
        if (l > 0 && !(points[l - 1] < p))
            throw GridError("time grid is not strictly increasing at point " + std::to_string(l + 1));
    }
    return TimeGrid(std::move(points), Kind::explicit_points);
}

TimeGrid merge_grids(const TimeGrid& a, const TimeGrid& b) {
    if (a == b) return a;
    std::vector<double> merged;
    merged.reserve(a.size() + b.size());
    std::ranges::set_union(a.points(), b.points(), std::back_inserter(merged));
    return TimeGrid::from_points(std::move(merged));
}

// ---------------------------------------------------------------------------
// Sample

void PairedFunctionalSample::validate() const {
    if (x.subjects() == 0 || x.channels() == 0 || x.times() == 0 || y.times() == 0)
        throw IngestError("sample must have at least one subject, channel and time point");
    if (x.subjects() != y.subjects() || x.channels() != y.channels())
        throw IngestError("X and Y disagree on subjects or channels");
    if (grid_x.size() != x.times() || grid_y.size() != y.times())
        throw IngestError("grid length does not match the time dimension");
    if (!channel_labels.empty() && channel_labels.size() != x.channels())
        throw IngestError("channel label count does not match the channel dimension");
    if (!subject_ids.empty() && subject_ids.size() != x.subjects())
        throw IngestError("subject id count does not match the subject dimension");
    const auto finite = [](const Panel& p) {
        return std::ranges::all_of(p.data(), [](double v) { return std::isfinite(v); });
    };
    if (!finite(x) || !finite(y)) throw IngestError("sample contains non-finite values");
}

DifferenceMatrix::DifferenceMatrix(Panel z, TimeGrid grid, Integration integration)
    : z_(std::move(z)), grid_(std::move(grid)), integration_(integration) {
    const std::size_t n = z_.subjects();
    const std::size_t kt = z_.channels() * z_.times();
    if (n == 0 || kt == 0) throw DomainError("difference matrix must be non-empty");
    if (grid_.size() != z_.times()) throw GridError("grid length does not match the time dimension");

    mean_.assign(kt, 0.0);
    const auto raw = z_.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < kt; ++c) mean_[c] += raw[i * kt + c];
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& m : mean_) m *= inv_n;

    centered_ = Panel(n, z_.channels(), z_.times());
    auto out = centered_.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < kt; ++c) out[i * kt + c] = raw[i * kt + c] - mean_[c];
}

InterpolatedCurve::InterpolatedCurve(TimeGrid breakpoints, std::vector<double> values)
    : grid_(std::move(breakpoints)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw GridError("curve values and breakpoints differ in length");
}

double InterpolatedCurve::operator()(double t) const noexcept {
    const auto pts = grid_.points();
    if (t <= pts.front()) return values_.front();
    if (t >= pts.back()) return values_.back();
    const auto it = std::ranges::upper_bound(pts, t);
    const std::size_t hi = static_cast<std::size_t>(it - pts.begin());
    const std::size_t lo = hi - 1;
    if (t == pts[lo]) return values_[lo];
    const double w = (t - pts[lo]) / (pts[hi] - pts[lo]);
    return values_[lo] + w * (values_[hi] - values_[lo]);
}

InterpolatedCurve interpolate(std::span<const double> values, const TimeGrid& grid) {
    return InterpolatedCurve(grid, std::vector<double>(values.begin(), values.end()));
}

DifferenceMatrix difference(const PairedFunctionalSample& sample) {
    if (!(sample.grid_x == sample.grid_y) || sample.x.times() != sample.y.times())
        throw GridMismatch("X and Y are observed on different time grids; use the asynchronous path");
    if (sample.x.subjects() != sample.y.subjects() || sample.x.channels() != sample.y.channels())
        throw IngestError("X and Y disagree on subjects or channels");
    Panel z(sample.x.subjects(), sample.x.channels(), sample.x.times());
    const auto xs = sample.x.data();
    const auto ys = sample.y.data();
    auto zs = z.data();
    for (std::size_t c = 0; c < zs.size(); ++c) zs[c] = ys[c] - xs[c];
    return DifferenceMatrix(std::move(z), sample.grid_x, Integration::riemann);
}

namespace {

// Values of the interpolant through (grid, values) at sorted query points.
void resample_linear(std::span<const double> values, const TimeGrid& grid, std::span<const double> query,
                     std::span<double> out) {
    const auto pts = grid.points();
    std::size_t seg = 0;
    for (std::size_t q = 0; q < query.size(); ++q) {
        const double t = query[q];
        if (t <= pts.front()) {
            out[q] = values.front();
            continue;
        }
        if (t >= pts.back()) {
            out[q] = values.back();
            continue;
        }
        while (pts[seg + 1] < t) ++seg;
        if (t == pts[seg + 1]) {
            out[q] = values[seg + 1];
        } else if (t == pts[seg]) {
            out[q] = values[seg];
        } else {
            const double w = (t - pts[seg]) / (pts[seg + 1] - pts[seg]);
            out[q] = values[seg] + w * (values[seg + 1] - values[seg]);
        }
    }
}

}  // namespace

DifferenceMatrix async_difference(const PairedFunctionalSample& sample) {
    if (sample.x.subjects() != sample.y.subjects() || sample.x.channels() != sample.y.channels())
        throw IngestError("X and Y disagree on subjects or channels");
    const TimeGrid merged = merge_grids(sample.grid_x, sample.grid_y);
    const std::size_t n = sample.x.subjects();
    const std::size_t channels = sample.x.channels();
    const std::size_t m = merged.size();
    Panel z(n, channels, m);
    std::vector<double> xv(m);
    std::vector<double> yv(m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < channels; ++k) {
            resample_linear(sample.x.curve(i, k), sample.grid_x, merged.points(), xv);
            resample_linear(sample.y.curve(i, k), sample.grid_y, merged.points(), yv);
            auto out = z.curve(i, k);
            for (std::size_t l = 0; l < m; ++l) out[l] = yv[l] - xv[l];
        }
    }
    return DifferenceMatrix(std::move(z), merged, Integration::exact_linear);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

struct GroupData {
    std::vector<std::string> subjects;
    std::vector<std::string> channels;
    Panel panel;
    TimeGrid grid = TimeGrid::uniform(1);
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open " + path.string());
    std::string buf;
    in.seekg(0, std::ios::end);
    buf.resize(static_cast<std::size_t>(in.tellg()));
    in.seekg(0);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    return buf;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view s, const std::string& where) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw IngestError(where + ": cannot parse '" + std::string(s) + "'");
    return v;
}

GroupData parse_group(const std::filesystem::path& path, const CsvSchema& schema) {
    const std::string buf = read_file(path);
    const std::string file = path.filename().string();
    std::string_view rest(buf);

    auto next_line = [&rest]() -> std::optional<std::string_view> {
        while (!rest.empty()) {
            const std::size_t nl = rest.find('\n');
            std::string_view line = rest.substr(0, nl);
            rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
            line = trim(line);
            if (!line.empty()) return line;
        }
        return std::nullopt;
    };

    const auto header = next_line();
    if (!header) throw IngestError(file + ": empty file");
    const auto columns = split_fields(*header);
    auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t c = 0; c < columns.size(); ++c)
            if (trim(columns[c]) == name) return c;
        return std::nullopt;
    };
    const auto col_subject = find_column(schema.subject);
    const auto col_channel = find_column(schema.channel);
    const auto col_index = find_column(schema.time_index);
    const auto col_value = find_column(schema.value);
    const auto col_time = find_column(schema.time);
    if (!col_subject || !col_channel || !col_index || !col_value)
        throw IngestError(file + ": header must contain " + schema.subject + "," + schema.channel + "," +
                          schema.time_index + "," + schema.value);

    struct Record {
        std::uint32_t subject;
        std::uint32_t channel;
        std::uint32_t index;
        double value;
        double time;
    };
    std::vector<Record> records;
    std::unordered_map<std::string, std::uint32_t> subject_ids;
    std::unordered_map<std::string, std::uint32_t> channel_ids;
    GroupData out;
    std::uint32_t max_index = 0;
    std::size_t line_no = 1;

    auto intern = [](std::unordered_map<std::string, std::uint32_t>& ids, std::vector<std::string>& names,
                     std::string_view key) {
        auto [it, inserted] = ids.try_emplace(std::string(key), static_cast<std::uint32_t>(names.size()));
        if (inserted) names.emplace_back(key);
        return it->second;
    };

    while (const auto line = next_line()) {
        ++line_no;
        const auto fields = split_fields(*line);
        const std::string where = file + ":" + std::to_string(line_no);
        if (fields.size() != columns.size()) throw IngestError(where + ": expected " + std::to_string(columns.size()) + " fields");

        Record r{};
        r.subject = intern(subject_ids, out.subjects, trim(fields[*col_subject]));
        r.channel = intern(channel_ids, out.channels, trim(fields[*col_channel]));
        const std::string_view idx = trim(fields[*col_index]);
        const auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), r.index);
        if (ec != std::errc() || ptr != idx.data() + idx.size() || r.index == 0)
            throw IngestError(where + ": time_index must be a positive integer");
        r.value = parse_double(fields[*col_value], where);
        if (!std::isfinite(r.value)) throw IngestError(where + ": non-finite value");
        r.time = col_time ? parse_double(fields[*col_time], where) : 0.0;
        max_index = std::max(max_index, r.index);
        records.push_back(r);
    }
    if (records.empty()) throw IngestError(file + ": no data rows");

    const std::size_t n = out.subjects.size();
    const std::size_t channels = out.channels.size();
    const std::size_t times = max_index;
    out.panel = Panel(n, channels, times, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::uint8_t> seen(n * channels * times, 0);
    std::vector<double> time_points(times, std::numeric_limits<double>::quiet_NaN());
    for (const Record& r : records) {
        const std::size_t l = r.index - 1;
        const std::size_t flat = (static_cast<std::size_t>(r.subject) * channels + r.channel) * times + l;
        if (seen[flat])
            throw IngestError(file + ": duplicate " + out.subjects[r.subject] + "/" + out.channels[r.channel] + "/t" +
                              std::to_string(r.index));
        seen[flat] = 1;
        out.panel.at(r.subject, r.channel, l) = r.value;
        if (col_time) {
            if (std::isnan(time_points[l])) {
                time_points[l] = r.time;
            } else if (time_points[l] != r.time) {
                throw IngestError(file + ": inconsistent time for time_index " + std::to_string(r.index));
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < channels; ++k)
            for (std::size_t l = 0; l < times; ++l)
                if (!seen[(i * channels + k) * times + l])
                    throw IngestError(out.subjects[i] + "/" + out.channels[k] + "/t" + std::to_string(l + 1) + " missing");

    if (col_time) {
        try {
            out.grid = TimeGrid::from_points(std::move(time_points));
        } catch (const GridError& e) {
            throw IngestError(file + ": " + e.what());
        }
    } else {
        out.grid = TimeGrid::uniform(times);
    }
    return out;
}

// Reorders `group` so its subjects and channels follow `subjects`/`channels`.
Panel align(const GroupData& group, const std::vector<std::string>& subjects,
            const std::vector<std::string>& channels, const std::string& label) {
    if (group.subjects.size() != subjects.size() || group.channels.size() != channels.size())
        throw IngestError(label + " does not have the same subjects and channels as X");
    std::unordered_map<std::string_view, std::size_t> sidx;
    std::unordered_map<std::string_view, std::size_t> cidx;
    for (std::size_t i = 0; i < group.subjects.size(); ++i) sidx.emplace(group.subjects[i], i);
    for (std::size_t k = 0; k < group.channels.size(); ++k) cidx.emplace(group.channels[k], k);

    Panel out(subjects.size(), channels.size(), group.panel.times());
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        const auto s = sidx.find(subjects[i]);
        if (s == sidx.end()) throw IngestError(label + " is missing subject " + subjects[i]);
        for (std::size_t k = 0; k < channels.size(); ++k) {
            const auto c = cidx.find(channels[k]);
            if (c == cidx.end()) throw IngestError(label + " is missing channel " + channels[k]);
            std::ranges::copy(group.panel.curve(s->second, c->second), out.curve(i, k).begin());
        }
    }
    return out;
}

void append_number(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    out.append(buf, res.ptr);
}

void write_group(const std::filesystem::path& path, const Panel& panel, const TimeGrid& grid,
                 const std::vector<std::string>& subjects, const std::vector<std::string>& channels) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    const bool with_time = grid.kind() == TimeGrid::Kind::explicit_points;
    std::string buf = with_time ? "subject,channel,time_index,value,time\n" : "subject,channel,time_index,value\n";
    buf.reserve(1 << 20);
    for (std::size_t i = 0; i < panel.subjects(); ++i) {
        for (std::size_t k = 0; k < panel.channels(); ++k) {
            for (std::size_t l = 0; l < panel.times(); ++l) {
                buf += subjects[i];
                buf += ',';
                buf += channels[k];
                buf += ',';
                buf += std::to_string(l + 1);
                buf += ',';
                append_number(buf, panel.at(i, k, l));
                if (with_time) {
                    buf += ',';
                    append_number(buf, grid[l]);
                }
                buf += '\n';
            }
            if (buf.size() > (1u << 20)) {
                os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
                buf.clear();
            }
        }
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw IoError("failed writing " + path.string());
}

std::vector<std::string> default_names(std::size_t count, const char* prefix) {
    std::vector<std::string> names(count);
    for (std::size_t i = 0; i < count; ++i) names[i] = prefix + std::to_string(i + 1);
    return names;
}

}  // namespace

PairedFunctionalSample ingest_csv(const std::filesystem::path& path_x, const std::filesystem::path& path_y,
                                  const CsvSchema& schema) {
    GroupData gx = parse_group(path_x, schema);
    GroupData gy = parse_group(path_y, schema);

    PairedFunctionalSample sample;
    sample.y = align(gy, gx.subjects, gx.channels, path_y.filename().string());
    sample.x = std::move(gx.panel);
    sample.grid_x = std::move(gx.grid);
    sample.grid_y = std::move(gy.grid);
    sample.subject_ids = std::move(gx.subjects);
    sample.channel_labels = std::move(gx.channels);
    sample.validate();
    return sample;
}

void export_csv(const PairedFunctionalSample& sample, const std::filesystem::path& path_x,
                const std::filesystem::path& path_y) {
    sample.validate();
    const auto subjects = sample.subject_ids.empty() ? default_names(sample.subjects(), "s") : sample.subject_ids;
    const auto channels = sample.channel_labels.empty() ? default_names(sample.channels(), "ch") : sample.channel_labels;
    write_group(path_x, sample.x, sample.grid_x, subjects, channels);
    write_group(path_y, sample.y, sample.grid_y, subjects, channels);
}

}  // namespace funcmax
