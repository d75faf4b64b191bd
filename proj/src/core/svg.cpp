#include "svg.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

namespace caplab {

namespace {

void append_fmt(std::string* s, const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 2, 3)))
#endif
    ;

void append_fmt(std::string* s, const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  *s += buf;
}

// Tagged-set fills; cycled when a domain carries more than eight tags.
const char* kPalette[8] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                           "#9467bd", "#8c564b", "#17becf", "#bcbd22"};

}  // namespace

bool render_domain_svg(const DomainSpec& spec, const PotentialField* field,
                       std::string* out, std::string* err) {
  if (spec.dim != 2) {
    if (err) *err = "svg rendering is 2-D only";
    return false;
  }
  if (spec.boxes.empty()) {
    if (err) *err = "svg: empty domain";
    return false;
  }
  if (field) {
    if (field->dim != 2) {
      if (err) *err = "svg: field dimension mismatch";
      return false;
    }
    if ((double)field->dims[0] * (double)field->dims[1] > 2.1e6) {
      if (err) *err = "svg: field too large to rasterize (over ~2M cells)";
      return false;
    }
  }

  Coord blo, bhi;
  spec_bbox(spec, &blo, &bhi);
  const double unit = std::exp2((double)-spec.scale);
  const double x0 = (double)blo[0] * unit, x1 = (double)bhi[0] * unit;
  const double y0 = (double)blo[1] * unit, y1 = (double)bhi[1] * unit;
  const double wreal = x1 - x0, hreal = y1 - y0;
  if (!(wreal > 0.0) || !(hreal > 0.0)) {
    if (err) *err = "svg: degenerate bounding box";
    return false;
  }

  const double pad = 20.0;
  const double kW = 800.0;
  const double k = (kW - 2.0 * pad) / wreal;
  const double kH = hreal * k + 2.0 * pad;
  // y is flipped: SVG grows downward, the domain grows upward.
  auto mx = [&](double x) { return pad + (x - x0) * k; };
  auto my = [&](double y) { return pad + (y1 - y) * k; };

  std::string& s = *out;
  s.clear();
  append_fmt(&s,
             "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.4f\" "
             "height=\"%.4f\" viewBox=\"0 0 %.4f %.4f\">\n",
             kW, kH, kW, kH);
  append_fmt(&s,
             "<rect x=\"0\" y=\"0\" width=\"%.4f\" height=\"%.4f\" "
             "fill=\"#ffffff\"/>\n",
             kW, kH);

  if (field) {
    s += "<g shape-rendering=\"crispEdges\">\n";
    const double h = field->h;
    for (i64 iy = 0; iy < field->dims[1]; ++iy) {
      for (i64 ix = 0; ix < field->dims[0]; ++ix) {
        const double u = field->u[(size_t)(iy * field->dims[0] + ix)];
        if (std::isnan(u)) continue;
        const double v = u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
        const int g = (int)std::lround(255.0 * v);
        const double cx = field->origin[0] + (double)ix * h;
        const double cy = field->origin[1] + (double)iy * h;
        append_fmt(&s,
                   "<rect x=\"%.6f\" y=\"%.6f\" width=\"%.6f\" "
                   "height=\"%.6f\" fill=\"#%02x%02x%02x\"/>\n",
                   mx(cx), my(cy + h), h * k, h * k, g, g, g);
      }
    }
    s += "</g>\n";
  }

  for (size_t t = 0; t < spec.tags.size(); ++t) {
    const TaggedSet& ts = spec.tags[t];
    const char* color = kPalette[t % 8];
    append_fmt(&s, "<g fill=\"%s\" fill-opacity=\"0.35\">\n", color);
    for (const IBox& b : ts.boxes) {
      const double bx0 = (double)b.lo[0] * unit, bx1 = (double)b.hi[0] * unit;
      const double by0 = (double)b.lo[1] * unit, by1 = (double)b.hi[1] * unit;
      append_fmt(&s,
                 "<rect x=\"%.6f\" y=\"%.6f\" width=\"%.6f\" height=\"%.6f\">"
                 "<title>%s</title></rect>\n",
                 mx(bx0), my(by1), (bx1 - bx0) * k, (by1 - by0) * k,
                 ts.name.c_str());
    }
    s += "</g>\n";
  }

  s += "<g fill=\"none\" stroke=\"#222222\" stroke-width=\"1\">\n";
  for (const IBox& b : spec.boxes) {
    const double bx0 = (double)b.lo[0] * unit, bx1 = (double)b.hi[0] * unit;
    const double by0 = (double)b.lo[1] * unit, by1 = (double)b.hi[1] * unit;
    append_fmt(&s,
               "<rect x=\"%.6f\" y=\"%.6f\" width=\"%.6f\" height=\"%.6f\"/>\n",
               mx(bx0), my(by1), (bx1 - bx0) * k, (by1 - by0) * k);
  }
  s += "</g>\n";

  const double cx = (double)spec.center[0] * unit;
  const double cy = (double)spec.center[1] * unit;
  append_fmt(&s, "<circle cx=\"%.6f\" cy=\"%.6f\" r=\"3\" fill=\"#d62728\"/>\n",
             mx(cx), my(cy));
  s += "</svg>\n";
  return true;
}

}  // namespace caplab
