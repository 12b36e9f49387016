#pragma once
// Plain two-layer stacked LSTM for one branch, written per sample with
// explicit gate vectors and hand-derived backpropagation through time.
// Shares no code with the tape-based generator.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace ref {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct LayerWeights {
  Mat Wi, Wf, Wo, Wc;  // input weights
  Mat Ui, Uf, Uo, Uc;  // recurrent weights
  Vec bi, bf, bo, bc;
};

struct BranchWeights {
  Mat E;      // token embedding, embed x K
  Vec start;  // start embedding
  LayerWeights in, out;
  Mat Wy;
  Vec by;
};

struct LayerGrads {
  Mat Wi, Wf, Wo, Wc, Ui, Uf, Uo, Uc;
  Vec bi, bf, bo, bc;
  void zero_like(const LayerWeights& w) {
    Wi = Mat::Zero(w.Wi.rows(), w.Wi.cols()); Wf = Wi; Wo = Wi; Wc = Wi;
    Ui = Mat::Zero(w.Ui.rows(), w.Ui.cols()); Uf = Ui; Uo = Ui; Uc = Ui;
    bi = Vec::Zero(w.bi.size()); bf = bi; bo = bi; bc = bi;
  }
};

struct BranchGrads {
  Mat E;
  Vec start;
  LayerGrads in, out;
  Mat Wy;
  Vec by;
};

inline double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline Vec sigv(const Vec& v) { return v.unaryExpr([](double x) { return sig(x); }); }
inline Vec tanhv(const Vec& v) { return v.unaryExpr([](double x) { return std::tanh(x); }); }

struct LayerCache {
  Vec x, h_prev, c_prev, i, f, o, g, c, h;
};

inline LayerCache layer_forward(const LayerWeights& w, const Vec& x, const Vec& h_prev, const Vec& c_prev) {
  LayerCache k;
  k.x = x;
  k.h_prev = h_prev;
  k.c_prev = c_prev;
  k.i = sigv(w.Wi * x + w.Ui * h_prev + w.bi);
  k.f = sigv(w.Wf * x + w.Uf * h_prev + w.bf);
  k.o = sigv(w.Wo * x + w.Uo * h_prev + w.bo);
  k.g = tanhv(w.Wc * x + w.Uc * h_prev + w.bc);
  k.c = k.f.cwiseProduct(c_prev) + k.i.cwiseProduct(k.g);
  k.h = k.o.cwiseProduct(tanhv(k.c));
  return k;
}

/// Returns (dx, dh_prev, dc_prev); accumulates weight gradients.
inline void layer_backward(const LayerWeights& w, const LayerCache& k, const Vec& dh, const Vec& dc_in,
                           LayerGrads& gr, Vec& dx, Vec& dh_prev, Vec& dc_prev) {
  const Vec tc = tanhv(k.c);
  const Vec d_o = dh.cwiseProduct(tc);
  const Vec dc = dc_in + dh.cwiseProduct(k.o).cwiseProduct((1.0 - tc.array().square()).matrix());
  const Vec d_i = dc.cwiseProduct(k.g);
  const Vec d_g = dc.cwiseProduct(k.i);
  const Vec d_f = dc.cwiseProduct(k.c_prev);
  dc_prev = dc.cwiseProduct(k.f);
  const Vec zi = d_i.cwiseProduct(k.i.cwiseProduct((1.0 - k.i.array()).matrix()));
  const Vec zf = d_f.cwiseProduct(k.f.cwiseProduct((1.0 - k.f.array()).matrix()));
  const Vec zo = d_o.cwiseProduct(k.o.cwiseProduct((1.0 - k.o.array()).matrix()));
  const Vec zg = d_g.cwiseProduct((1.0 - k.g.array().square()).matrix());
  gr.Wi += zi * k.x.transpose(); gr.Wf += zf * k.x.transpose();
  gr.Wo += zo * k.x.transpose(); gr.Wc += zg * k.x.transpose();
  gr.Ui += zi * k.h_prev.transpose(); gr.Uf += zf * k.h_prev.transpose();
  gr.Uo += zo * k.h_prev.transpose(); gr.Uc += zg * k.h_prev.transpose();
  gr.bi += zi; gr.bf += zf; gr.bo += zo; gr.bc += zg;
  dx = w.Wi.transpose() * zi + w.Wf.transpose() * zf + w.Wo.transpose() * zo + w.Wc.transpose() * zg;
  dh_prev = w.Ui.transpose() * zi + w.Uf.transpose() * zf + w.Uo.transpose() * zo + w.Uc.transpose() * zg;
}

struct BranchRun {
  std::vector<Vec> logits;
  BranchGrads grads;
};

/// One sample. prev_tokens[t] is the 0-based token fed at step t (-1 for
/// the start position), lyrics[t] the lyric vector, rse the branch RSE.
/// Loss = sum_t dot(loss_weights[t], logits[t]).
inline BranchRun run_branch(const BranchWeights& w, const std::vector<Vec>& lyrics, const std::vector<int>& prev_tokens,
                            const Vec& rse, const std::vector<Vec>& loss_weights) {
  const std::size_t T = lyrics.size();
  const Eigen::Index h = w.in.bi.size(), u = w.out.bi.size();
  const Eigen::Index dx = lyrics[0].size(), de = w.E.rows();
  BranchRun run;
  std::vector<LayerCache> cin, cout;
  Vec hi = Vec::Zero(h), ci = Vec::Zero(h), ho = Vec::Zero(u), co = Vec::Zero(u);
  for (std::size_t t = 0; t < T; ++t) {
    Vec x(dx + de + rse.size());
    x.head(dx) = lyrics[t];
    x.segment(dx, de) = prev_tokens[t] < 0 ? w.start : Vec(w.E.col(prev_tokens[t]));
    x.tail(rse.size()) = rse;
    cin.push_back(layer_forward(w.in, x, hi, ci));
    hi = cin.back().h;
    ci = cin.back().c;
    cout.push_back(layer_forward(w.out, hi, ho, co));
    ho = cout.back().h;
    co = cout.back().c;
    run.logits.push_back(w.Wy * ho + w.by);
  }
  auto& g = run.grads;
  g.E = Mat::Zero(w.E.rows(), w.E.cols());
  g.start = Vec::Zero(w.start.size());
  g.in.zero_like(w.in);
  g.out.zero_like(w.out);
  g.Wy = Mat::Zero(w.Wy.rows(), w.Wy.cols());
  g.by = Vec::Zero(w.by.size());
  Vec dhi_next = Vec::Zero(h), dci_next = Vec::Zero(h), dho_next = Vec::Zero(u), dco_next = Vec::Zero(u);
  for (std::size_t s = T; s-- > 0;) {
    const Vec& dy = loss_weights[s];
    g.Wy += dy * cout[s].h.transpose();
    g.by += dy;
    Vec dho = w.Wy.transpose() * dy + dho_next;
    Vec dx_out, dh_prev, dc_prev;
    layer_backward(w.out, cout[s], dho, dco_next, g.out, dx_out, dh_prev, dc_prev);
    dho_next = dh_prev;
    dco_next = dc_prev;
    Vec dhi = dx_out + dhi_next;
    Vec dx_in;
    layer_backward(w.in, cin[s], dhi, dci_next, g.in, dx_in, dh_prev, dc_prev);
    dhi_next = dh_prev;
    dci_next = dc_prev;
    const Vec de_vec = dx_in.segment(dx, de);
    if (prev_tokens[s] < 0) {
      g.start += de_vec;
    } else {
      g.E.col(prev_tokens[s]) += de_vec;
    }
  }
  return run;
}

}  // namespace ref
