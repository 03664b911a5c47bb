#include "cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "gldp/format.hpp"

namespace gldp::cli {

namespace {

constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!(lo <= hi)) lo = 0, hi = 1;
        if (hi - lo < 1e-300) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

std::string header(const std::string& title) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
       << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << num(kW / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"15\">" << escape(title) << "</text>\n";
    return os.str();
}

}  // namespace

std::string svg_line_plot(const PlotSpec& spec, const std::vector<Series>& series) {
    auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return false;
        if (spec.log_x && !(x > 0)) return false;
        if (spec.log_y && !(y > 0)) return false;
        return true;
    };
    Range rx, ry;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            rx.add(tx(s.x[i]));
            ry.add(ty(s.y[i]));
        }
    }
    rx.finish();
    ry.finish();
    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto py = [&](double v) { return kTop + ph - (v - ry.lo) / (ry.hi - ry.lo) * ph; };

    std::ostringstream os;
    os << header(spec.title);
    os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
       << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        const double lx = spec.log_x ? std::pow(10.0, fx) : fx;
        const double ly = spec.log_y ? std::pow(10.0, fy) : fy;
        os << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(kTop + ph + 16)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick(lx) << "</text>\n";
        os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(fy) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick(ly) << "</text>\n";
    }
    os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kH - 10)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(spec.x_label)
       << (spec.log_x ? " (log)" : "") << "</text>\n";
    os << "<text x=\"16\" y=\"" << num(kTop + ph / 2) << "\" transform=\"rotate(-90 16 " << num(kTop + ph / 2)
       << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(spec.y_label)
       << (spec.log_y ? " (log)" : "") << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % std::size(kColors)];
        std::string pts;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            pts += num(px(tx(s.x[i]))) + "," + num(py(ty(s.y[i]))) + " ";
            if (spec.markers) {
                os << "<circle cx=\"" << num(px(tx(s.x[i]))) << "\" cy=\"" << num(py(ty(s.y[i])))
                   << "\" r=\"3\" fill=\"" << color << "\"/>\n";
            }
        }
        if (!pts.empty()) {
            pts.pop_back();
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts
               << "\"/>\n";
        }
        const double ly = kTop + 12 + 16.0 * k;
        os << "<line x1=\"" << num(kW - kRight + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
           << num(kW - kRight + 30) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << num(kW - kRight + 34) << "\" y=\"" << num(ly)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_heat_map(const std::string& title, const Field2D& field, const std::vector<double>& t,
                         const std::vector<double>& x) {
    Range rv;
    for (std::size_t r = 0; r < field.rows(); ++r) {
        for (double v : field.row(r)) {
            if (std::isfinite(v)) rv.add(v);
        }
    }
    rv.finish();
    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    // Downsample to at most 200 x 120 cells to keep the file small.
    const std::size_t nt = field.rows(), nx = field.cols();
    const std::size_t ct = std::min<std::size_t>(nt, 120), cx = std::min<std::size_t>(nx, 200);
    std::ostringstream os;
    os << header(title);
    const double cw = pw / static_cast<double>(cx), chh = ph / static_cast<double>(ct);
    for (std::size_t i = 0; i < ct; ++i) {
        const std::size_t r = (i * (nt - 1)) / std::max<std::size_t>(ct - 1, 1);
        for (std::size_t j = 0; j < cx; ++j) {
            const std::size_t c = (j * (nx - 1)) / std::max<std::size_t>(cx - 1, 1);
            const double v = field(r, c);
            const double a = std::isfinite(v) ? (v - rv.lo) / (rv.hi - rv.lo) : 0.0;
            const int red = static_cast<int>(std::lround(255 * a));
            const int blue = static_cast<int>(std::lround(255 * (1 - a)));
            os << "<rect x=\"" << num(kLeft + j * cw) << "\" y=\"" << num(kTop + ph - (i + 1) * chh)
               << "\" width=\"" << num(cw + 0.05) << "\" height=\"" << num(chh + 0.05) << "\" fill=\"rgb(" << red
               << ",40," << blue << ")\"/>\n";
        }
    }
    os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
       << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    if (!x.empty() && !t.empty()) {
        os << "<text x=\"" << num(kLeft) << "\" y=\"" << num(kTop + ph + 16)
           << "\" font-family=\"sans-serif\" font-size=\"11\">x=" << tick(x.front()) << "</text>\n";
        os << "<text x=\"" << num(kLeft + pw) << "\" y=\"" << num(kTop + ph + 16)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">x=" << tick(x.back())
           << "</text>\n";
        os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(kTop + ph)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">t=" << tick(t.front())
           << "</text>\n";
        os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(kTop + 10)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">t=" << tick(t.back())
           << "</text>\n";
    }
    os << "<text x=\"" << num(kW - kRight + 10) << "\" y=\"" << num(kTop + 12)
       << "\" font-family=\"sans-serif\" font-size=\"11\">max " << tick(rv.hi) << "</text>\n";
    os << "<text x=\"" << num(kW - kRight + 10) << "\" y=\"" << num(kTop + ph)
       << "\" font-family=\"sans-serif\" font-size=\"11\">min " << tick(rv.lo) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace gldp::cli
