#include "cadseq/data/synth.hpp"

#include <algorithm>
#include <cmath>

#include "cadseq/cad/quantize.hpp"
#include "cadseq/util/error.hpp"

namespace cadseq::data {

using namespace cadseq::cad;

namespace {

// Bin bounds used by the generator. Scale and origin are kept conservative
// so that profile vertices always land strictly inside the model cube and
// any extrusion depth keeps the plane-adjacent voxels occupied.
constexpr int kOriginLo = 71, kOriginHi = 184;   // |origin| <= ~0.45
constexpr int kScaleLo = 38, kScaleHi = 114;     // s in [0.15, 0.447]
constexpr int kDistLo = 10, kDistHi = 200;
constexpr int kThetaLo = 21, kThetaHi = 213;     // moderate sweep angles

struct ContentFlags {
  bool line = false, circle = false, arc = false;
};

// Bernoulli parameters adjusted so that, conditioned on at least one flag
// being set, the marginals match the configured targets.
struct AdjustedProbs {
  double line, circle, arc;
};

AdjustedProbs adjust_probs(const SynthConfig& cfg) {
  double ql = cfg.p_line, qc = cfg.p_circle, qa = cfg.p_arc;
  for (int it = 0; it < 60; ++it) {
    const double none = (1 - ql) * (1 - qc) * (1 - qa);
    ql = std::min(1.0, cfg.p_line * (1 - none));
    qc = std::min(1.0, cfg.p_circle * (1 - none));
    qa = std::min(1.0, cfg.p_arc * (1 - none));
  }
  return {ql, qc, qa};
}

ContentFlags draw_flags(Rng& rng, const AdjustedProbs& p) {
  for (;;) {
    ContentFlags f;
    f.line = rng.bernoulli(p.line);
    f.circle = rng.bernoulli(p.circle);
    f.arc = rng.bernoulli(p.arc);
    if (f.line || f.circle || f.arc) return f;
  }
}

int draw_extrude_type(Rng& rng, const SynthConfig& cfg) {
  const double u = rng.uniform01();
  if (u < cfg.w_one_sided) return kOneSided;
  if (u < cfg.w_one_sided + cfg.w_symmetric) return kSymmetric;
  return kTwoSided;
}

CadCommand random_extrude(Rng& rng, const SynthConfig& cfg, bool first_pair) {
  const int w = draw_extrude_type(rng, cfg);
  int b = kJoin;
  if (cfg.allow_cuts && !first_pair && rng.bernoulli(0.2))
    b = rng.bernoulli(0.5) ? kCut : kIntersect;
  return CadCommand::extrude(
      rng.uniform_int(0, 255), rng.uniform_int(0, 255), rng.uniform_int(0, 255),
      rng.uniform_int(kOriginLo, kOriginHi), rng.uniform_int(kOriginLo, kOriginHi),
      rng.uniform_int(kOriginLo, kOriginHi), rng.uniform_int(kScaleLo, kScaleHi),
      rng.uniform_int(kDistLo, kDistHi), rng.uniform_int(0, kDistHi), b, w);
}

// Star-shaped polygon loop: sorted jittered angles around a center, so the
// polygon is always simple with the center interior.
std::vector<CadCommand> polygon_loop(Rng& rng, int n_curves, bool use_lines,
                                     bool use_arcs) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double cx = rng.uniform(-0.25, 0.25);
    const double cy = rng.uniform(-0.25, 0.25);
    const double rho = rng.uniform(0.3, 0.75);
    std::vector<int> bx(n_curves), by(n_curves);
    for (int i = 0; i < n_curves; ++i) {
      const double phi = 2.0 * M_PI * (i + 0.2 + 0.6 * rng.uniform01()) / n_curves;
      const double r = rho * rng.uniform(0.7, 1.0);
      bx[i] = quantize_slot(kSlotX, cx + r * std::cos(phi));
      by[i] = quantize_slot(kSlotY, cy + r * std::sin(phi));
    }
    // reject near-coincident consecutive vertices or a degenerate area
    const double tol = quant_step(-1.0, 1.0);
    bool ok = true;
    double area2 = 0.0;
    for (int i = 0; i < n_curves; ++i) {
      const double ax = dequantize_slot(kSlotX, bx[i]);
      const double ay = dequantize_slot(kSlotY, by[i]);
      const double nx = dequantize_slot(kSlotX, bx[(i + 1) % n_curves]);
      const double ny = dequantize_slot(kSlotY, by[(i + 1) % n_curves]);
      if (std::hypot(nx - ax, ny - ay) <= 2.0 * tol) ok = false;
      area2 += ax * ny - nx * ay;
    }
    if (!ok || std::abs(area2) <= 8.0 * tol * tol) continue;

    std::vector<CadCommand> loop{CadCommand::sol()};
    for (int i = 0; i < n_curves; ++i) {
      bool arc = use_arcs && (!use_lines || rng.bernoulli(0.45));
      if (arc)
        loop.push_back(CadCommand::arc(bx[i], by[i],
                                       rng.uniform_int(kThetaLo, kThetaHi),
                                       rng.uniform_int(0, 1)));
      else
        loop.push_back(CadCommand::line(bx[i], by[i]));
    }
    return loop;
  }
  fail(ErrorKind::config_error, "polygon generation failed to converge");
}

std::vector<CadCommand> circle_loop(Rng& rng, bool ring) {
  std::vector<CadCommand> cmds;
  const double cx = rng.uniform(-0.25, 0.25);
  const double cy = rng.uniform(-0.25, 0.25);
  const double r = rng.uniform(0.3, 0.7);
  cmds.push_back(CadCommand::sol());
  cmds.push_back(CadCommand::circle(quantize_slot(kSlotX, cx), quantize_slot(kSlotY, cy),
                                    quantize_slot(kSlotRadius, r)));
  if (ring) {
    const double ri = r * rng.uniform(0.4, 0.7);
    cmds.push_back(CadCommand::sol());
    cmds.push_back(CadCommand::circle(quantize_slot(kSlotX, cx), quantize_slot(kSlotY, cy),
                                      quantize_slot(kSlotRadius, ri)));
  }
  return cmds;
}

}  // namespace

CadSequence synth_sequence(Rng& rng, const SynthConfig& cfg) {
  const AdjustedProbs probs = adjust_probs(cfg);
  const ContentFlags flags = draw_flags(rng, probs);
  const int budget = std::min(cfg.max_len, kSeqLen) - 1;

  std::vector<CadCommand> cmds;
  bool have_circle = false, have_line = false, have_arc = false;
  const int n_pairs = rng.uniform_int(1, std::max(1, cfg.max_pairs));
  for (int p = 0; p < n_pairs; ++p) {
    const int remaining = budget - static_cast<int>(cmds.size());
    if (remaining < 3) break;

    const bool polygon_possible = (flags.line || flags.arc) && remaining >= 5;
    bool make_circle = flags.circle && (!polygon_possible || rng.bernoulli(0.35));
    if (flags.circle && !have_circle && p == n_pairs - 1) make_circle = true;
    if (!make_circle && !polygon_possible) make_circle = flags.circle;
    if (!make_circle && !polygon_possible) break;

    std::vector<CadCommand> loop_cmds;
    if (make_circle) {
      const bool ring = remaining >= 5 && rng.bernoulli(0.45);
      loop_cmds = circle_loop(rng, ring);
      have_circle = true;
    } else {
      const int max_curves = std::clamp(remaining - 2, 3, 8);
      const int n_curves = rng.uniform_int(3, max_curves);
      loop_cmds = polygon_loop(rng, n_curves, flags.line, flags.arc);
      for (const CadCommand& c : loop_cmds) {
        have_line |= c.ctype == CommandType::line;
        have_arc |= c.ctype == CommandType::arc;
      }
    }
    cmds.insert(cmds.end(), loop_cmds.begin(), loop_cmds.end());
    cmds.push_back(random_extrude(rng, cfg, p == 0));
  }

  // materialize missed content flags with endpoint-preserving swaps
  if (flags.arc && !have_arc) {
    for (auto& c : cmds)
      if (c.ctype == CommandType::line) {
        c = CadCommand::arc(c.params[kSlotX], c.params[kSlotY],
                            rng.uniform_int(kThetaLo, kThetaHi), rng.uniform_int(0, 1));
        break;
      }
  } else if (flags.line && !have_line) {
    for (auto& c : cmds)
      if (c.ctype == CommandType::arc) {
        c = CadCommand::line(c.params[kSlotX], c.params[kSlotY]);
        break;
      }
  }

  CadSequence seq = CadSequence::from_commands(cmds);
  const ValidityReport report = validate_structure(seq);
  if (!report.valid)
    fail(ErrorKind::config_error, "synth produced an invalid sequence: " + *report.rule);
  return seq;
}

std::vector<DatasetRecord> synth_dataset(const SynthConfig& cfg) {
  Rng root(cfg.seed);
  std::vector<DatasetRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    Rng rng = root.fork(static_cast<std::uint64_t>(i));
    DatasetRecord rec;
    rec.id = "synth-" + std::to_string(cfg.seed) + "-" + std::to_string(i);
    rec.matrix = emit_matrix(synth_sequence(rng, cfg));
    records.push_back(std::move(rec));
  }
  return records;
}

Split split_of(const std::string& id) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (const char c : id) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  const std::uint64_t bucket = h % 100;
  if (bucket < 90) return Split::train;
  if (bucket < 95) return Split::val;
  return Split::test;
}

DatasetSummary ingest(const std::vector<cad::DatasetRecord>& records) {
  DatasetSummary s;
  s.count = static_cast<int>(records.size());
  for (const DatasetRecord& rec : records) {
    CadSequence seq;
    try {
      seq = parse_sequence(rec.matrix);
    } catch (const CadError& e) {
      fail(ErrorKind::parse_error, "record '" + rec.id + "': " + e.what());
    }
    bool line = false, arc = false, circle = false;
    bool one = false, sym = false, two = false;
    for (int k = 0; k < seq.logical_len(); ++k) {
      const CadCommand& c = seq.at(k);
      switch (c.ctype) {
        case CommandType::line: line = true; break;
        case CommandType::arc: arc = true; break;
        case CommandType::circle: circle = true; break;
        case CommandType::extrude:
          one |= c.params[kSlotType] == kOneSided;
          sym |= c.params[kSlotType] == kSymmetric;
          two |= c.params[kSlotType] == kTwoSided;
          break;
        default: break;
      }
    }
    s.with_line += line;
    s.with_arc += arc;
    s.with_circle += circle;
    s.w_one_sided += one;
    s.w_symmetric += sym;
    s.w_two_sided += two;
    s.split_ids[static_cast<int>(split_of(rec.id))].push_back(rec.id);
  }
  return s;
}

}  // namespace cadseq::data
