#include "pulsechain/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace pulsechain::svgplot {

namespace {

constexpr double kWidth = 800, kHeight = 560;
constexpr double kLeft = 80, kRight = 40, kTop = 50, kBottom = 60;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Round tick step to 1/2/5 x 10^k.
double nice_step(double span, int target_ticks) {
    const double raw = span / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    double step;
    if (frac <= 1.5)
        step = 1.0;
    else if (frac <= 3.5)
        step = 2.0;
    else if (frac <= 7.5)
        step = 5.0;
    else
        step = 10.0;
    return step * mag;
}

} // namespace

void write_chart(const ChartSpec& spec, const std::filesystem::path& path) {
    double xmin = HUGE_VAL, xmax = -HUGE_VAL;
    double ymin = HUGE_VAL, ymax = -HUGE_VAL;
    bool any = false;
    for (const auto& s : spec.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (spec.log_y && y <= 0.0) continue;
            if (spec.log_y) y = std::log10(y);
            const double e =
                i < s.yerr.size() && !spec.log_y ? s.yerr[i] : 0.0;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, y - e);
            ymax = std::max(ymax, y + e);
            any = true;
        }
    }
    if (!any) throw std::runtime_error("write_chart: no data to plot");
    if (xmax == xmin) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) {
        return kLeft + (x - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight);
    };
    auto py = [&](double y) {
        if (spec.log_y) y = std::log10(y);
        return kHeight - kBottom -
               (y - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom);
    };

    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_chart: cannot write " +
                                 path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
        << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2
        << "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\" "
           "font-family=\"sans-serif\">"
        << spec.title << "</text>\n";

    // axes
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom
        << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
        << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";

    const double xstep = nice_step(xmax - xmin, 8);
    for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-12;
         x += xstep) {
        out << "<line x1=\"" << px(x) << "\" y1=\"" << kHeight - kBottom
            << "\" x2=\"" << px(x) << "\" y2=\"" << kHeight - kBottom + 5
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px(x) << "\" y=\"" << kHeight - kBottom + 20
            << "\" text-anchor=\"middle\" font-size=\"12\" "
               "font-family=\"sans-serif\">"
            << fmt(x) << "</text>\n";
    }
    const double ystep = nice_step(ymax - ymin, 8);
    for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-12;
         y += ystep) {
        const double yy =
            kHeight - kBottom -
            (y - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom);
        out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << yy << "\" x2=\""
            << kLeft << "\" y2=\"" << yy << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << yy + 4
            << "\" text-anchor=\"end\" font-size=\"12\" "
               "font-family=\"sans-serif\">"
            << (spec.log_y ? "1e" + fmt(y) : fmt(y)) << "</text>\n";
    }
    out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\""
        << kHeight - 15
        << "\" text-anchor=\"middle\" font-size=\"14\" "
           "font-family=\"sans-serif\">"
        << spec.x_label << "</text>\n";
    out << "<text x=\"20\" y=\"" << (kTop + kHeight - kBottom) / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" "
           "font-family=\"sans-serif\" transform=\"rotate(-90 20 "
        << (kTop + kHeight - kBottom) / 2 << ")\">" << spec.y_label
        << "</text>\n";

    for (std::size_t si = 0; si < spec.series.size(); ++si) {
        const auto& s = spec.series[si];
        const char* color = kColors[si % 6];
        if (s.line && s.x.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (spec.log_y && s.y[i] <= 0.0) continue;
                out << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
            }
            out << "\"/>\n";
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (spec.log_y && s.y[i] <= 0.0) continue;
            out << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\""
                << fmt(py(s.y[i])) << "\" r=\"3\" fill=\"" << color
                << "\"/>\n";
            if (i < s.yerr.size() && s.yerr[i] > 0.0 && !spec.log_y) {
                out << "<line x1=\"" << fmt(px(s.x[i])) << "\" y1=\""
                    << fmt(py(s.y[i] - s.yerr[i])) << "\" x2=\""
                    << fmt(px(s.x[i])) << "\" y2=\""
                    << fmt(py(s.y[i] + s.yerr[i])) << "\" stroke=\"" << color
                    << "\"/>\n";
            }
        }
        out << "<text x=\"" << kWidth - kRight - 10 << "\" y=\""
            << kTop + 18 * static_cast<double>(si)
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color
            << "\" font-family=\"sans-serif\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace pulsechain::svgplot
