#include "mmdr/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "mmdr/common/math.hpp"
#include "mmdr/common/rng.hpp"

namespace mmdr::nn {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)
constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
// Depth images arrive clipped to [0.3, 10] metres; map that to [0, 1].
constexpr double kDepthMin = 0.3;
constexpr double kDepthSpan = 9.7;

int conv_out(int in, int kernel, int stride) {
    return (in - kernel) / stride + 1;
}

void mgs_rows(double* a, int n, int m, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        double* row = a + static_cast<std::size_t>(i) * m;
        for (int attempt = 0;; ++attempt) {
            for (int j = 0; j < i; ++j) {
                const double* prev = a + static_cast<std::size_t>(j) * m;
                double dot = 0.0;
                for (int c = 0; c < m; ++c) dot += row[c] * prev[c];
                for (int c = 0; c < m; ++c) row[c] -= dot * prev[c];
            }
            double norm = 0.0;
            for (int c = 0; c < m; ++c) norm += row[c] * row[c];
            norm = std::sqrt(norm);
            if (norm > 1e-10) {
                for (int c = 0; c < m; ++c) row[c] /= norm;
                break;
            }
            if (attempt > 8) throw std::runtime_error("orthogonal init failed");
            for (int c = 0; c < m; ++c) row[c] = normal(rng);
        }
    }
}

// Fills w (n x m, row-major) with a gain-scaled orthonormal matrix along the
// shorter dimension, so forward maps neither inflate nor collapse norms.
void orthogonal_init(std::vector<double>& w, int n, int m, double gain,
                     Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& x : w) x = normal(rng);
    if (n <= m) {
        mgs_rows(w.data(), n, m, rng);
    } else {
        std::vector<double> t(w.size());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                t[static_cast<std::size_t>(j) * n + i] =
                    w[static_cast<std::size_t>(i) * m + j];
        mgs_rows(t.data(), m, n, rng);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                w[static_cast<std::size_t>(i) * m + j] =
                    t[static_cast<std::size_t>(j) * n + i];
    }
    for (double& x : w) x *= gain;
}

}  // namespace

int ArchConfig::conv_rows(int layer) const {
    int r = in_rows;
    for (int l = 0; l < layer; ++l) r = conv_out(r, conv_kernel[l], conv_stride[l]);
    return r;
}

int ArchConfig::conv_cols(int layer) const {
    int c = in_cols;
    for (int l = 0; l < layer; ++l) c = conv_out(c, conv_kernel[l], conv_stride[l]);
    return c;
}

int ArchConfig::flat_dim() const {
    return conv_channels[2] * conv_rows(3) * conv_cols(3);
}

void ArchConfig::validate() const {
    if (in_channels < 1 || in_rows < 1 || in_cols < 1)
        throw std::invalid_argument("depth input shape must be positive");
    for (int l = 0; l < 3; ++l) {
        if (conv_channels[l] < 1 || conv_kernel[l] < 1 || conv_stride[l] < 1)
            throw std::invalid_argument("conv config must be positive");
        if (conv_rows(l + 1) < 1 || conv_cols(l + 1) < 1)
            throw std::invalid_argument("conv stack shrinks input below 1x1");
    }
    if (proprio_dim < 1 || proprio_hidden < 1 || feature_dim < 1 ||
        head_hidden < 1 || action_dim < 1)
        throw std::invalid_argument("layer widths must be positive");
    if (!proprio_scale.empty() &&
        static_cast<int>(proprio_scale.size()) != proprio_dim)
        throw std::invalid_argument("proprio_scale size mismatch");
}

std::vector<double> default_proprio_scale(int history) {
    const double pi = 3.14159265358979323846;
    std::vector<double> s;
    s.reserve(static_cast<std::size_t>(history) * 8);
    for (int h = 0; h < history; ++h) {
        const double snap[8] = {1.0, 1.0, 1.0 / pi, 1.0 / 3.0,
                                1.0, 1.0, 1.0,      1.0};
        s.insert(s.end(), snap, snap + 8);
    }
    return s;
}

double gaussian_log_prob(const double* mean, const double* log_std,
                         const double* action, int dim) {
    double lp = -0.5 * dim * kLog2Pi;
    for (int i = 0; i < dim; ++i) {
        const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
        lp -= 0.5 * z * z + log_std[i];
    }
    return lp;
}

double gaussian_entropy(const double* log_std, int dim) {
    double h = 0.5 * dim * (1.0 + kLog2Pi);
    for (int i = 0; i < dim; ++i) h += log_std[i];
    return h;
}

Network::Network(const ArchConfig& arch, std::uint64_t init_seed)
    : arch_(arch) {
    arch_.validate();
    const int f = arch_.flat_dim();
    const int fd = arch_.feature_dim;
    const int ph = arch_.proprio_hidden;
    const int hh = arch_.head_hidden;

    // Declaration order is the checkpoint serialization order.
    auto add = [&](const std::string& name, std::vector<int> shape) {
        ParamBlock blk;
        blk.name = name;
        blk.shape = std::move(shape);
        std::size_t n = 1;
        for (int d : blk.shape) n *= static_cast<std::size_t>(d);
        blk.w.assign(n, 0.0);
        blk.g.assign(n, 0.0);
        blk.m.assign(n, 0.0);
        blk.v.assign(n, 0.0);
        blocks_.push_back(std::move(blk));
    };
    add("conv1_w", {arch_.conv_channels[0], arch_.in_channels,
                    arch_.conv_kernel[0], arch_.conv_kernel[0]});
    add("conv1_b", {arch_.conv_channels[0]});
    add("conv2_w", {arch_.conv_channels[1], arch_.conv_channels[0],
                    arch_.conv_kernel[1], arch_.conv_kernel[1]});
    add("conv2_b", {arch_.conv_channels[1]});
    add("conv3_w", {arch_.conv_channels[2], arch_.conv_channels[1],
                    arch_.conv_kernel[2], arch_.conv_kernel[2]});
    add("conv3_b", {arch_.conv_channels[2]});
    add("vis_proj_w", {fd, f});
    add("vis_proj_b", {fd});
    add("pi_enc1_w", {ph, arch_.proprio_dim});
    add("pi_enc1_b", {ph});
    add("pi_enc2_w", {fd, ph});
    add("pi_enc2_b", {fd});
    add("vf_enc1_w", {ph, arch_.proprio_dim});
    add("vf_enc1_b", {ph});
    add("vf_enc2_w", {fd, ph});
    add("vf_enc2_b", {fd});
    add("pi_head1_w", {hh, 2 * fd});
    add("pi_head1_b", {hh});
    add("pi_head2_w", {arch_.action_dim, hh});
    add("pi_head2_b", {arch_.action_dim});
    add("vf_head1_w", {hh, 2 * fd});
    add("vf_head1_b", {hh});
    add("vf_head2_w", {1, hh});
    add("vf_head2_b", {1});
    add("log_std", {arch_.action_dim});

    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        ParamBlock& blk = blocks_[i];
        Rng rng = make_rng(init_seed, stream::kInit,
                           static_cast<std::uint64_t>(i));
        if (blk.name == "log_std") {
            std::fill(blk.w.begin(), blk.w.end(), arch_.logstd_init);
        } else if (blk.shape.size() >= 2) {
            int rows = blk.shape[0];
            int cols = 1;
            for (std::size_t d = 1; d < blk.shape.size(); ++d)
                cols *= blk.shape[d];
            // Near-zero initial actions: exploration comes from the std.
            const double gain = blk.name == "pi_head2_w" ? 0.01 : 1.0;
            orthogonal_init(blk.w, rows, cols, gain, rng);
        }
        // biases stay zero
    }
}

ParamBlock& Network::block(const std::string& name) {
    for (ParamBlock& b : blocks_)
        if (b.name == name) return b;
    throw std::out_of_range("no parameter block named " + name);
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const ParamBlock& b : blocks_) n += b.size();
    return n;
}

double Network::log_std(int i) const {
    return std::clamp(blocks_.back().w[static_cast<std::size_t>(i)],
                      kLogStdMin, kLogStdMax);
}

void Network::add_log_std_grad(int i, double g) {
    ParamBlock& blk = blocks_.back();
    const double w = blk.w[static_cast<std::size_t>(i)];
    if (w >= kLogStdMin && w <= kLogStdMax)
        blk.g[static_cast<std::size_t>(i)] += g;
}

void Network::fc_forward(const ParamBlock& w, const ParamBlock& b, int batch,
                         const double* in, double* out, bool activate) {
    const int n = w.shape[0];
    const int m = w.shape[1];
    gemm(false, true, batch, n, m, 1.0, in, m, w.w.data(), m, 0.0, out, n);
    for (int r = 0; r < batch; ++r) {
        double* row = out + static_cast<std::size_t>(r) * n;
        for (int c = 0; c < n; ++c) row[c] += b.w[c];
        if (activate)
            for (int c = 0; c < n; ++c) row[c] = fast_tanh(row[c]);
    }
}

void Network::fc_backward(ParamBlock& w, ParamBlock& b, int batch,
                          const double* in, const double* out, double* dout,
                          double* din, bool activated) {
    const int n = w.shape[0];
    const int m = w.shape[1];
    const std::size_t total = static_cast<std::size_t>(batch) * n;
    if (activated)
        for (std::size_t i = 0; i < total; ++i) dout[i] *= 1.0 - out[i] * out[i];
    gemm(true, false, n, m, batch, 1.0, dout, n, in, m, 1.0, w.g.data(), m);
    for (int r = 0; r < batch; ++r)
        for (int c = 0; c < n; ++c)
            b.g[c] += dout[static_cast<std::size_t>(r) * n + c];
    if (din != nullptr)
        gemm(false, false, batch, m, n, 1.0, dout, n, w.w.data(), m, 0.0, din,
             m);
}

void Network::im2col(int layer, const double* in, double* col) const {
    const int hin = arch_.conv_rows(layer);
    const int win = arch_.conv_cols(layer);
    const int hout = arch_.conv_rows(layer + 1);
    const int wout = arch_.conv_cols(layer + 1);
    const int cin = layer == 0 ? arch_.in_channels : arch_.conv_channels[layer - 1];
    const int k = arch_.conv_kernel[layer];
    const int s = arch_.conv_stride[layer];
    const int hw = hout * wout;
    for (int c = 0; c < cin; ++c)
        for (int ki = 0; ki < k; ++ki)
            for (int kj = 0; kj < k; ++kj) {
                double* dst = col + static_cast<std::size_t>((c * k + ki) * k + kj) * hw;
                const double* src = in + static_cast<std::size_t>(c) * hin * win;
                for (int oy = 0; oy < hout; ++oy) {
                    const double* row = src + (oy * s + ki) * win + kj;
                    for (int ox = 0; ox < wout; ++ox)
                        dst[oy * wout + ox] = row[ox * s];
                }
            }
}

void Network::col2im_add(int layer, const double* col, double* din) const {
    const int hin = arch_.conv_rows(layer);
    const int win = arch_.conv_cols(layer);
    const int hout = arch_.conv_rows(layer + 1);
    const int wout = arch_.conv_cols(layer + 1);
    const int cin = layer == 0 ? arch_.in_channels : arch_.conv_channels[layer - 1];
    const int k = arch_.conv_kernel[layer];
    const int s = arch_.conv_stride[layer];
    const int hw = hout * wout;
    for (int c = 0; c < cin; ++c)
        for (int ki = 0; ki < k; ++ki)
            for (int kj = 0; kj < k; ++kj) {
                const double* src = col + static_cast<std::size_t>((c * k + ki) * k + kj) * hw;
                double* dst = din + static_cast<std::size_t>(c) * hin * win;
                for (int oy = 0; oy < hout; ++oy) {
                    double* row = dst + (oy * s + ki) * win + kj;
                    for (int ox = 0; ox < wout; ++ox)
                        row[ox * s] += src[oy * wout + ox];
                }
            }
}

void Network::conv_forward(int layer, int batch, const double* in,
                           double* out) {
    const ParamBlock& w = blocks_[static_cast<std::size_t>(layer) * 2];
    const ParamBlock& b = blocks_[static_cast<std::size_t>(layer) * 2 + 1];
    const int cin = layer == 0 ? arch_.in_channels : arch_.conv_channels[layer - 1];
    const int cout = arch_.conv_channels[layer];
    const int k = arch_.conv_kernel[layer];
    const int hw = arch_.conv_rows(layer + 1) * arch_.conv_cols(layer + 1);
    const int in_sz = cin * arch_.conv_rows(layer) * arch_.conv_cols(layer);
    const int kk = cin * k * k;
    col_.resize(static_cast<std::size_t>(kk) * hw);
    for (int s = 0; s < batch; ++s) {
        im2col(layer, in + static_cast<std::size_t>(s) * in_sz, col_.data());
        double* slab = out + static_cast<std::size_t>(s) * cout * hw;
        gemm(false, false, cout, hw, kk, 1.0, w.w.data(), kk, col_.data(), hw,
             0.0, slab, hw);
        for (int c = 0; c < cout; ++c)
            for (int p = 0; p < hw; ++p)
                slab[static_cast<std::size_t>(c) * hw + p] =
                    fast_tanh(slab[static_cast<std::size_t>(c) * hw + p] + b.w[c]);
    }
}

void Network::conv_backward(int layer, int batch, const double* in,
                            const double* out, double* dout, double* din) {
    ParamBlock& w = blocks_[static_cast<std::size_t>(layer) * 2];
    ParamBlock& b = blocks_[static_cast<std::size_t>(layer) * 2 + 1];
    const int cin = layer == 0 ? arch_.in_channels : arch_.conv_channels[layer - 1];
    const int cout = arch_.conv_channels[layer];
    const int k = arch_.conv_kernel[layer];
    const int hw = arch_.conv_rows(layer + 1) * arch_.conv_cols(layer + 1);
    const int in_sz = cin * arch_.conv_rows(layer) * arch_.conv_cols(layer);
    const int kk = cin * k * k;
    const std::size_t total = static_cast<std::size_t>(batch) * cout * hw;
    for (std::size_t i = 0; i < total; ++i) dout[i] *= 1.0 - out[i] * out[i];
    col_.resize(static_cast<std::size_t>(kk) * hw);
    if (din != nullptr) {
        dcol_.resize(static_cast<std::size_t>(kk) * hw);
        std::fill(din, din + static_cast<std::size_t>(batch) * in_sz, 0.0);
    }
    for (int s = 0; s < batch; ++s) {
        const double* dslab = dout + static_cast<std::size_t>(s) * cout * hw;
        im2col(layer, in + static_cast<std::size_t>(s) * in_sz, col_.data());
        gemm(false, true, cout, kk, hw, 1.0, dslab, hw, col_.data(), hw, 1.0,
             w.g.data(), kk);
        for (int c = 0; c < cout; ++c) {
            double acc = 0.0;
            for (int p = 0; p < hw; ++p)
                acc += dslab[static_cast<std::size_t>(c) * hw + p];
            b.g[c] += acc;
        }
        if (din != nullptr) {
            gemm(true, false, kk, hw, cout, 1.0, w.w.data(), kk, dslab, hw,
                 0.0, dcol_.data(), hw);
            col2im_add(layer, dcol_.data(),
                       din + static_cast<std::size_t>(s) * in_sz);
        }
    }
}

Network::Result Network::forward(int batch, const double* proprio,
                                 const double* depth, bool record) {
    if (batch < 1) throw std::invalid_argument("batch must be positive");
    const int pd = arch_.proprio_dim;
    const int fd = arch_.feature_dim;
    const std::size_t bsz = static_cast<std::size_t>(batch);

    norm_proprio_.resize(bsz * pd);
    if (arch_.proprio_scale.empty()) {
        std::copy(proprio, proprio + bsz * pd, norm_proprio_.begin());
    } else {
        for (std::size_t r = 0; r < bsz; ++r)
            for (int c = 0; c < pd; ++c)
                norm_proprio_[r * pd + c] =
                    proprio[r * pd + c] * arch_.proprio_scale[c];
    }

    vis_feat_.assign(bsz * fd, 0.0);
    if (!arch_.state_only) {
        const std::size_t in_sz =
            static_cast<std::size_t>(arch_.in_channels) * arch_.in_rows * arch_.in_cols;
        norm_depth_.resize(bsz * in_sz);
        for (std::size_t i = 0; i < bsz * in_sz; ++i)
            norm_depth_[i] = (depth[i] - kDepthMin) / kDepthSpan;
        for (int l = 0; l < 3; ++l)
            conv_out_[l].resize(bsz * arch_.conv_channels[l] *
                                arch_.conv_rows(l + 1) * arch_.conv_cols(l + 1));
        conv_forward(0, batch, norm_depth_.data(), conv_out_[0].data());
        conv_forward(1, batch, conv_out_[0].data(), conv_out_[1].data());
        conv_forward(2, batch, conv_out_[1].data(), conv_out_[2].data());
        fc_forward(block("vis_proj_w"), block("vis_proj_b"), batch,
                   conv_out_[2].data(), vis_feat_.data(), true);
    }

    pi_h1_.resize(bsz * arch_.proprio_hidden);
    pi_feat_.resize(bsz * fd);
    vf_h1_.resize(bsz * arch_.proprio_hidden);
    vf_feat_.resize(bsz * fd);
    fc_forward(block("pi_enc1_w"), block("pi_enc1_b"), batch,
               norm_proprio_.data(), pi_h1_.data(), true);
    fc_forward(block("pi_enc2_w"), block("pi_enc2_b"), batch, pi_h1_.data(),
               pi_feat_.data(), true);
    fc_forward(block("vf_enc1_w"), block("vf_enc1_b"), batch,
               norm_proprio_.data(), vf_h1_.data(), true);
    fc_forward(block("vf_enc2_w"), block("vf_enc2_b"), batch, vf_h1_.data(),
               vf_feat_.data(), true);

    cat_pi_.resize(bsz * 2 * fd);
    cat_vf_.resize(bsz * 2 * fd);
    for (std::size_t r = 0; r < bsz; ++r) {
        std::memcpy(cat_pi_.data() + r * 2 * fd, vis_feat_.data() + r * fd,
                    sizeof(double) * fd);
        std::memcpy(cat_pi_.data() + r * 2 * fd + fd, pi_feat_.data() + r * fd,
                    sizeof(double) * fd);
        std::memcpy(cat_vf_.data() + r * 2 * fd, vis_feat_.data() + r * fd,
                    sizeof(double) * fd);
        std::memcpy(cat_vf_.data() + r * 2 * fd + fd, vf_feat_.data() + r * fd,
                    sizeof(double) * fd);
    }

    pi_head1_.resize(bsz * arch_.head_hidden);
    vf_head1_.resize(bsz * arch_.head_hidden);
    mean_.resize(bsz * arch_.action_dim);
    value_.resize(bsz);
    fc_forward(block("pi_head1_w"), block("pi_head1_b"), batch, cat_pi_.data(),
               pi_head1_.data(), true);
    fc_forward(block("pi_head2_w"), block("pi_head2_b"), batch,
               pi_head1_.data(), mean_.data(), false);
    fc_forward(block("vf_head1_w"), block("vf_head1_b"), batch, cat_vf_.data(),
               vf_head1_.data(), true);
    fc_forward(block("vf_head2_w"), block("vf_head2_b"), batch,
               vf_head1_.data(), value_.data(), false);

    recorded_ = record;
    recorded_batch_ = batch;
    return Result{mean_.data(), value_.data()};
}

PolicyOutput Network::forward_one(const std::vector<double>& proprio,
                                  const std::vector<double>& depth) {
    if (static_cast<int>(proprio.size()) != arch_.proprio_dim)
        throw std::invalid_argument("proprio size mismatch");
    const std::size_t want = arch_.state_only
                                 ? depth.size()
                                 : static_cast<std::size_t>(arch_.in_channels) *
                                       arch_.in_rows * arch_.in_cols;
    if (!arch_.state_only && depth.size() != want)
        throw std::invalid_argument("depth size mismatch");
    Result r = forward(1, proprio.data(), depth.data(), false);
    PolicyOutput out;
    for (int i = 0; i < arch_.action_dim && i < 2; ++i) {
        out.mean[i] = r.mean[i];
        out.log_std[i] = log_std(i);
    }
    out.value = r.value[0];
    return out;
}

void Network::backward(int batch, const double* dmean, const double* dvalue) {
    if (!recorded_ || batch != recorded_batch_)
        throw std::logic_error("backward requires a recorded forward pass");
    recorded_ = false;

    const int fd = arch_.feature_dim;
    const int hh = arch_.head_hidden;
    const int ad = arch_.action_dim;
    const std::size_t bsz = static_cast<std::size_t>(batch);

    std::vector<double>& d_out = dbuf_[0];
    std::vector<double>& d_h1 = dbuf_[1];
    std::vector<double>& d_cat_pi = dbuf_[2];
    std::vector<double>& d_cat_vf = dbuf_[3];
    std::vector<double>& d_feat = dbuf_[4];
    std::vector<double>& d_enc_h = dbuf_[5];
    std::vector<double>& d_vis = dbuf_[6];
    std::vector<double>& d_flat = dbuf_[7];
    std::vector<double>& d_conv_a = dbuf_[8];
    std::vector<double>& d_conv_b = dbuf_[9];

    // Policy head.
    d_out.assign(dmean, dmean + bsz * ad);
    d_h1.resize(bsz * hh);
    d_cat_pi.resize(bsz * 2 * fd);
    fc_backward(block("pi_head2_w"), block("pi_head2_b"), batch,
                pi_head1_.data(), mean_.data(), d_out.data(), d_h1.data(),
                false);
    fc_backward(block("pi_head1_w"), block("pi_head1_b"), batch,
                cat_pi_.data(), pi_head1_.data(), d_h1.data(),
                d_cat_pi.data(), true);

    // Value head.
    d_out.assign(dvalue, dvalue + bsz);
    d_cat_vf.resize(bsz * 2 * fd);
    fc_backward(block("vf_head2_w"), block("vf_head2_b"), batch,
                vf_head1_.data(), value_.data(), d_out.data(), d_h1.data(),
                false);
    fc_backward(block("vf_head1_w"), block("vf_head1_b"), batch,
                cat_vf_.data(), vf_head1_.data(), d_h1.data(),
                d_cat_vf.data(), true);

    // Split the concatenated gradients; the shared visual feature collects
    // both head contributions.
    d_vis.resize(bsz * fd);
    d_feat.resize(bsz * fd);
    d_enc_h.resize(bsz * arch_.proprio_hidden);
    for (std::size_t r = 0; r < bsz; ++r)
        for (int c = 0; c < fd; ++c)
            d_vis[r * fd + c] =
                d_cat_pi[r * 2 * fd + c] + d_cat_vf[r * 2 * fd + c];

    for (std::size_t r = 0; r < bsz; ++r)
        std::memcpy(d_feat.data() + r * fd, d_cat_pi.data() + r * 2 * fd + fd,
                    sizeof(double) * fd);
    fc_backward(block("pi_enc2_w"), block("pi_enc2_b"), batch, pi_h1_.data(),
                pi_feat_.data(), d_feat.data(), d_enc_h.data(), true);
    fc_backward(block("pi_enc1_w"), block("pi_enc1_b"), batch,
                norm_proprio_.data(), pi_h1_.data(), d_enc_h.data(), nullptr,
                true);

    for (std::size_t r = 0; r < bsz; ++r)
        std::memcpy(d_feat.data() + r * fd, d_cat_vf.data() + r * 2 * fd + fd,
                    sizeof(double) * fd);
    fc_backward(block("vf_enc2_w"), block("vf_enc2_b"), batch, vf_h1_.data(),
                vf_feat_.data(), d_feat.data(), d_enc_h.data(), true);
    fc_backward(block("vf_enc1_w"), block("vf_enc1_b"), batch,
                norm_proprio_.data(), vf_h1_.data(), d_enc_h.data(), nullptr,
                true);

    if (!arch_.state_only) {
        d_flat.resize(bsz * arch_.flat_dim());
        fc_backward(block("vis_proj_w"), block("vis_proj_b"), batch,
                    conv_out_[2].data(), vis_feat_.data(), d_vis.data(),
                    d_flat.data(), true);
        d_conv_a.resize(conv_out_[1].size());
        d_conv_b.resize(conv_out_[0].size());
        conv_backward(2, batch, conv_out_[1].data(), conv_out_[2].data(),
                      d_flat.data(), d_conv_a.data());
        conv_backward(1, batch, conv_out_[0].data(), conv_out_[1].data(),
                      d_conv_a.data(), d_conv_b.data());
        // The depth input is a leaf; skip its gradient.
        conv_backward(0, batch, norm_depth_.data(), conv_out_[0].data(),
                      d_conv_b.data(), nullptr);
    }
}

void Network::zero_grad() {
    for (ParamBlock& b : blocks_) std::fill(b.g.begin(), b.g.end(), 0.0);
}

void Network::adam_step(double lr, double beta1, double beta2, double eps) {
    ++adam_t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t_));
    for (ParamBlock& blk : blocks_) {
        for (std::size_t i = 0; i < blk.w.size(); ++i) {
            const double g = blk.g[i];
            blk.m[i] = beta1 * blk.m[i] + (1.0 - beta1) * g;
            blk.v[i] = beta2 * blk.v[i] + (1.0 - beta2) * g * g;
            blk.w[i] -= lr * (blk.m[i] / bc1) / (std::sqrt(blk.v[i] / bc2) + eps);
        }
        if (blk.name == "log_std")
            for (double& w : blk.w) w = std::clamp(w, kLogStdMin, kLogStdMax);
    }
}

}  // namespace mmdr::nn
