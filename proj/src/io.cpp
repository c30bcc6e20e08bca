#include "nozzle/io.hpp"

#include "nozzle/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nozzle {

std::string format_number(double x, int digits) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    x += 0.0;  // -0 prints as 0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string field_csv(const DiscreteField& field, const VelocityField& velocity) {
    const auto& grid = field.grid();
    std::string out = "x1,x2,psi,u1,u2\n";
    out.reserve(grid.size() * 100);
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        for (std::size_t j = 0; j < grid.ns(); ++j) {
            const std::size_t p = grid.index(i, j);
            out += format_number(grid.x1(i));
            out += ',';
            out += format_number(grid.x2(i, j));
            out += ',';
            out += format_number(field.values()[p]);
            out += ',';
            out += format_number(velocity.u1[p]);
            out += ',';
            out += format_number(velocity.u2[p]);
            out += '\n';
        }
    }
    return out;
}

DiscreteField read_field_csv(const std::string& csv, std::shared_ptr<const CurvilinearGrid> grid,
                             const FlowConstants& consts) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line.rfind("x1,x2,psi", 0) != 0) {
        throw DomainError("read_field_csv: missing header");
    }
    std::vector<double> values;
    values.reserve(grid->size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t p = values.size();
        if (p >= grid->size()) throw DomainError("read_field_csv: more rows than grid nodes");
        double row[3];
        std::size_t start = 0;
        for (double& v : row) {
            const std::size_t end = line.find(',', start);
            v = std::stod(line.substr(start, end - start));
            start = end == std::string::npos ? line.size() : end + 1;
        }
        const std::size_t i = p / grid->ns();
        const std::size_t j = p % grid->ns();
        if (std::abs(row[0] - grid->x1(i)) > 1e-12 * (1.0 + std::abs(row[0])) ||
            std::abs(row[1] - grid->x2(i, j)) > 1e-12 * (1.0 + std::abs(row[1]))) {
            throw DomainError("read_field_csv: node " + std::to_string(p) + " does not match the grid");
        }
        values.push_back(row[2]);
    }
    if (values.size() != grid->size()) throw DomainError("read_field_csv: fewer rows than grid nodes");
    return DiscreteField(std::move(grid), consts, std::move(values));
}

std::string curves_csv(const FreeBoundaryCurves& curves) {
    std::string out = "x1,h0,h1,lower,upper,lower_contact,upper_contact\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        out += format_number(curves.x1[i]) + ',' + format_number(curves.wall_lower[i]) + ',' +
               format_number(curves.wall_upper[i]) + ',' + format_number(curves.lower[i]) + ',' +
               format_number(curves.upper[i]) + ',' + (curves.lower_contact[i] ? "1" : "0") + ',' +
               (curves.upper_contact[i] ? "1" : "0") + '\n';
    }
    return out;
}

std::string profile_csv(const ShearProfile& profile) {
    std::string out = "x2,phi,dphi\n";
    for (std::size_t k = 0; k < profile.nodes.size(); ++k) {
        out += format_number(profile.nodes[k]) + ',' + format_number(profile.values[k]) + ',' +
               format_number(profile.slopes[k]) + '\n';
    }
    return out;
}

std::string trace_csv(const std::vector<double>& energies) {
    std::string out = "sweep,energy\n";
    for (std::size_t k = 0; k < energies.size(); ++k) {
        out += std::to_string(k) + ',' + format_number(energies[k]) + '\n';
    }
    return out;
}

std::vector<Segment> contour_segments(const DiscreteField& field, double level) {
    const auto& grid = field.grid();
    std::vector<Segment> out;
    struct Corner {
        double v, x1, x2;
    };
    auto corner = [&](std::size_t i, std::size_t j) { return Corner{field(i, j) - level, grid.x1(i), grid.x2(i, j)}; };
    auto cut = [](const Corner& a, const Corner& b) {
        const double t = a.v / (a.v - b.v);
        return std::pair{a.x1 + t * (b.x1 - a.x1), a.x2 + t * (b.x2 - a.x2)};
    };
    for (std::size_t i = 0; i + 1 < grid.nx(); ++i) {
        for (std::size_t j = 0; j + 1 < grid.ns(); ++j) {
            // counter-clockwise: (i,j), (i+1,j), (i+1,j+1), (i,j+1)
            const Corner c[4] = {corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1)};
            int mask = 0;
            for (int k = 0; k < 4; ++k) mask |= (c[k].v > 0.0 ? 1 : 0) << k;
            if (mask == 0 || mask == 15) continue;
            std::vector<std::pair<double, double>> pts;
            for (int k = 0; k < 4; ++k) {
                const Corner& a = c[k];
                const Corner& b = c[(k + 1) % 4];
                if ((a.v > 0.0) != (b.v > 0.0)) pts.push_back(cut(a, b));
            }
            if (pts.size() == 2) {
                out.push_back({pts[0].first, pts[0].second, pts[1].first, pts[1].second});
            } else if (pts.size() == 4) {
                // saddle: decide by the cell-centre value
                const double centre = 0.25 * (c[0].v + c[1].v + c[2].v + c[3].v);
                const bool joined = (centre > 0.0) == (c[0].v > 0.0);
                if (joined) {
                    out.push_back({pts[0].first, pts[0].second, pts[1].first, pts[1].second});
                    out.push_back({pts[2].first, pts[2].second, pts[3].first, pts[3].second});
                } else {
                    out.push_back({pts[0].first, pts[0].second, pts[3].first, pts[3].second});
                    out.push_back({pts[1].first, pts[1].second, pts[2].first, pts[2].second});
                }
            }
        }
    }
    return out;
}

std::string field_svg(const DiscreteField& field, const FreeBoundaryCurves* curves) {
    const auto& grid = field.grid();
    const double q = field.consts().flux();
    double ylo = grid.lower(0);
    double yhi = grid.upper(0);
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        ylo = std::min(ylo, grid.lower(i));
        yhi = std::max(yhi, grid.upper(i));
    }
    const double xlo = grid.x1(0);
    const double xhi = grid.x1(grid.nx() - 1);
    const double scale = 900.0 / (xhi - xlo);
    const double margin = 20.0;
    const double width = 2.0 * margin + (xhi - xlo) * scale;
    const double height = 2.0 * margin + (yhi - ylo) * scale;
    auto px = [&](double x) { return format_number(margin + (x - xlo) * scale, 9); };
    auto py = [&](double y) { return format_number(margin + (yhi - y) * scale, 9); };
    auto polyline = [&](const std::vector<double>& xs, const std::vector<double>& ys, const char* style) {
        std::string s = "<polyline fill=\"none\" " + std::string(style) + " points=\"";
        for (std::size_t k = 0; k < xs.size(); ++k) {
            if (k) s += ' ';
            s += px(xs[k]) + ',' + py(ys[k]);
        }
        return s + "\"/>\n";
    };

    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + format_number(width, 9) +
           "\" height=\"" + format_number(height, 9) + "\" viewBox=\"0 0 " + format_number(width, 9) + ' ' +
           format_number(height, 9) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + format_number(width, 9) + "\" height=\"" + format_number(height, 9) +
           "\" fill=\"white\"/>\n";

    out += "<g id=\"contours\" stroke=\"#3060c0\" stroke-width=\"0.8\">\n";
    for (int k = 1; k <= 9; ++k) {
        const double level = q * k / 10.0;
        const auto segs = contour_segments(field, level);
        if (segs.empty()) continue;
        out += "<path fill=\"none\" data-level=\"" + format_number(level, 9) + "\" d=\"";
        for (const auto& s : segs) {
            out += 'M' + px(s.x1a) + ' ' + py(s.x2a) + 'L' + px(s.x1b) + ' ' + py(s.x2b);
        }
        out += "\"/>\n";
    }
    out += "</g>\n";

    std::vector<double> xs(grid.nx());
    std::vector<double> lo(grid.nx());
    std::vector<double> hi(grid.nx());
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        xs[i] = grid.x1(i);
        lo[i] = grid.lower(i);
        hi[i] = grid.upper(i);
    }
    out += "<g id=\"walls\">\n";
    out += polyline(xs, lo, "stroke=\"black\" stroke-width=\"1.5\"");
    out += polyline(xs, hi, "stroke=\"black\" stroke-width=\"1.5\"");
    out += "</g>\n";
    if (curves) {
        out += "<g id=\"free-boundaries\">\n";
        out += polyline(curves->x1, curves->lower, "stroke=\"#d02020\" stroke-width=\"1.2\"");
        out += polyline(curves->x1, curves->upper, "stroke=\"#d02020\" stroke-width=\"1.2\"");
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace nozzle
