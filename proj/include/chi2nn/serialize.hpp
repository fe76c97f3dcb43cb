#pragma once

// Plain-text model files.
//
//   chi2nn-model 1 <kind>
//   <inputs> <hidden>
//   <w_in row 0: hidden values>
//   ...
//   <w_in row inputs-1>
//   <hidden thresholds>
//   <output weights>
//   <output threshold>
//
// Values are written with 17 significant digits so a save/load round trip is
// exact.

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "chi2nn/errors.hpp"
#include "chi2nn/network.hpp"

namespace chi2nn {

struct SavedModel {
  ModelKind kind = ModelKind::chi2nn;
  Network net;
};

inline void save_model(std::ostream& out, const Network& net, ModelKind kind) {
  char buf[32];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << sep;
  };
  out << "chi2nn-model 1 " << to_string(kind) << '\n';
  out << net.inputs() << ' ' << net.hidden() << '\n';
  const std::size_t h = net.hidden();
  for (std::size_t k = 0; k < net.inputs(); ++k)
    for (std::size_t j = 0; j < h; ++j) put(net.w_in(k, j), j + 1 == h ? '\n' : ' ');
  for (std::size_t j = 0; j < h; ++j) put(net.b_hidden[j], j + 1 == h ? '\n' : ' ');
  for (std::size_t j = 0; j < h; ++j) put(net.w_out[j], j + 1 == h ? '\n' : ' ');
  put(net.b_out, '\n');
}

inline std::string save_model(const Network& net, ModelKind kind) {
  std::ostringstream s;
  save_model(s, net, kind);
  return s.str();
}

inline SavedModel load_model(std::istream& in) {
  std::string magic, kind;
  int version = 0;
  if (!(in >> magic >> version >> kind) || magic != "chi2nn-model" || version != 1)
    throw IntegrityError("load_model: not a chi2nn-model v1 file");
  SavedModel m;
  if (kind == "chi2nn") m.kind = ModelKind::chi2nn;
  else if (kind == "bpnn") m.kind = ModelKind::bpnn;
  else throw IntegrityError("load_model: unknown model kind '" + kind + "'");

  std::size_t r = 0, h = 0;
  if (!(in >> r >> h) || r == 0 || h == 0) throw IntegrityError("load_model: bad dimensions");
  m.net = Network(r, h);
  bool ok = true;
  m.net.for_each([&](double& v) {
    std::string tok;
    if (!ok || !(in >> tok)) {
      ok = false;
      return;
    }
    try {
      std::size_t used = 0;
      v = std::stod(tok, &used);
      ok = used == tok.size();
    } catch (const std::exception&) {
      ok = false;
    }
  });
  if (!ok) throw IntegrityError("load_model: truncated or malformed parameter list");
  std::string extra;
  if (in >> extra) throw IntegrityError("load_model: trailing data after parameters");
  return m;
}

inline SavedModel load_model(const std::string& text) {
  std::istringstream s(text);
  return load_model(s);
}

}  // namespace chi2nn
