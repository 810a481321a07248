#include "hjbport/io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "hjbport/errors.hpp"

namespace hjbport {

namespace {

constexpr char kMagic[8] = {'H', 'J', 'B', 'S', 'R', 'F', '0', '1'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_i64(std::string& out, std::int64_t v) { put_u64(out, static_cast<std::uint64_t>(v)); }

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

class Reader {
  public:
    Reader(const std::string& bytes, std::string path)
        : bytes_(bytes), path_(std::move(path)) {}

    std::uint64_t u64() {
        if (pos_ + 8 > bytes_.size()) {
            throw InputError("surface checkpoint '" + path_ + "' is truncated");
        }
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
                 << (8 * i);
        }
        pos_ += 8;
        return v;
    }

    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    bool done() const { return pos_ == bytes_.size(); }

  private:
    const std::string& bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(std::numeric_limits<double>::max_digits10);
    out << v;
    return out.str();
}

}  // namespace

void atomic_write(const std::string& path, const std::string& body) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) {
        std::filesystem::create_directories(target.parent_path());
    }
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open '" + tmp.string() + "' for writing");
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        out.flush();
        if (!out) throw InputError("failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, target);
}

void save_surface(const std::string& path, const ValueSurface& surface,
                  std::uint64_t config_hash) {
    std::string out;
    const auto& rows = surface.rows();
    const auto& nodes = surface.nodes();
    out.reserve(64 + static_cast<std::size_t>(nodes.size()) * 8 +
                rows.size() * (16 + static_cast<std::size_t>(nodes.size()) * 16));
    out.append(kMagic, sizeof(kMagic));
    put_u64(out, config_hash);
    put_f64(out, surface.horizon());
    put_f64(out, surface.xstar());
    const GridSpec& grid = surface.grid();
    put_f64(out, grid.h_x);
    put_i64(out, grid.extra_nodes);
    put_i64(out, grid.time_steps);
    put_f64(out, grid.shape_factor);
    put_i64(out, nodes.size());
    for (long i = 0; i < nodes.size(); ++i) put_f64(out, nodes[i]);
    put_i64(out, static_cast<std::int64_t>(rows.size()));
    for (const auto& row : rows) {
        put_i64(out, row.step);
        put_f64(out, row.time);
        for (long i = 0; i < row.values.size(); ++i) put_f64(out, row.values[i]);
        for (long i = 0; i < row.coeffs.size(); ++i) put_f64(out, row.coeffs[i]);
    }
    atomic_write(path, out);
}

LoadedSurface load_surface(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open surface checkpoint '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    if (bytes.size() < sizeof(kMagic) ||
        std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw InputError("'" + path + "' is not a surface checkpoint (bad magic)");
    }
    Reader r(bytes, path);
    r.u64();  // skip magic (verified above)
    const std::uint64_t hash = r.u64();
    const double horizon = r.f64();
    const double xstar = r.f64();
    GridSpec grid;
    grid.h_x = r.f64();
    grid.extra_nodes = static_cast<int>(r.i64());
    grid.time_steps = r.i64();
    grid.shape_factor = r.f64();

    const std::int64_t n = r.i64();
    if (n < 1 || n > 1000000) throw InputError("surface checkpoint node count out of range");
    Eigen::VectorXd nodes(n);
    for (std::int64_t i = 0; i < n; ++i) nodes[i] = r.f64();

    const std::int64_t n_rows = r.i64();
    if (n_rows < 1 || n_rows > 10000000) {
        throw InputError("surface checkpoint row count out of range");
    }
    std::vector<SurfaceRow> rows;
    rows.reserve(static_cast<std::size_t>(n_rows));
    for (std::int64_t j = 0; j < n_rows; ++j) {
        SurfaceRow row;
        row.step = r.i64();
        row.time = r.f64();
        row.values.resize(n);
        for (std::int64_t i = 0; i < n; ++i) row.values[i] = r.f64();
        row.coeffs.resize(n);
        for (std::int64_t i = 0; i < n; ++i) row.coeffs[i] = r.f64();
        rows.push_back(std::move(row));
    }
    if (!r.done()) throw InputError("surface checkpoint '" + path + "' has trailing bytes");

    auto basis = std::make_shared<RbfBasis>(nodes, grid.shape());
    return LoadedSurface{ValueSurface(grid, horizon, xstar, std::move(basis), std::move(rows)),
                         hash};
}

std::string stats_to_csv(const SimStats& stats) {
    std::string out = "t,mean_wealth,achievement_rate,percentile_point,target_f\n";
    for (const auto& d : stats.dates) {
        out += format_double(d.time) + "," + format_double(d.mean_wealth) + "," +
               format_double(d.achievement_rate) + "," + format_double(d.percentile_point) +
               "," + format_double(d.target_level) + "\n";
    }
    return out;
}

std::string histogram_to_csv(const Histogram& hist) {
    std::string out = "bin_left,bin_right,mass\n";
    for (std::size_t i = 0; i < hist.mass.size(); ++i) {
        out += format_double(hist.bin_left[i]) + "," +
               format_double(hist.bin_left[i] + hist.bin_width) + "," +
               format_double(hist.mass[i]) + "\n";
    }
    return out;
}

std::string weight_grid_to_csv(const WeightGrid& grid) {
    const int assets = grid.weights.empty() ? 0 : static_cast<int>(grid.weights[0].cols());
    std::string out = "t,x";
    for (int a = 0; a < assets; ++a) out += ",w" + std::to_string(a + 1);
    out += "\n";
    for (std::size_t ti = 0; ti < grid.times.size(); ++ti) {
        for (std::size_t xi = 0; xi < grid.wealth.size(); ++xi) {
            out += format_double(grid.times[ti]) + "," + format_double(grid.wealth[xi]);
            for (int a = 0; a < assets; ++a) {
                out += "," + format_double(grid.weights[ti](static_cast<long>(xi), a));
            }
            out += "\n";
        }
    }
    return out;
}

std::string solve_report_to_json(const SolveReport& report) {
    const nlohmann::json j{{"condition_estimate", report.condition_estimate},
                           {"condition_warning", report.condition_warning},
                           {"curvature_clamps", report.curvature_clamps},
                           {"row_d2_min", report.row_d2_min},
                           {"row_d2_max", report.row_d2_max},
                           {"boundary_oscillation", report.boundary_oscillation},
                           {"d2_t0_min", report.d2_t0_min},
                           {"d2_t0_max", report.d2_t0_max},
                           {"wall_seconds", report.wall_seconds}};
    return j.dump(2) + "\n";
}

StatsSeries parse_stats_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw MissingSeriesError("statistics file is empty");
    if (line.rfind("t,mean_wealth,achievement_rate,percentile_point,target_f", 0) != 0) {
        throw MissingSeriesError("statistics file has an unexpected header: " + line);
    }
    StatsSeries s;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw MissingSeriesError("statistics file has a non-numeric cell: " + cell);
            }
        }
        if (vals.size() != 5) {
            throw MissingSeriesError("statistics file row has " + std::to_string(vals.size()) +
                                     " columns, expected 5");
        }
        s.time.push_back(vals[0]);
        s.mean_wealth.push_back(vals[1]);
        s.achievement_rate.push_back(vals[2]);
        s.percentile_point.push_back(vals[3]);
        s.target_level.push_back(vals[4]);
    }
    if (s.time.empty()) throw MissingSeriesError("statistics file has no data rows");
    return s;
}

}  // namespace hjbport
