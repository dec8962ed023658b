#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mmdr::nn {

// Shapes of the dual-encoder actor-critic. The defaults are the training
// architecture; tests shrink everything to keep finite-difference sweeps
// cheap. All fields participate in checkpoint compatibility checks.
struct ArchConfig {
    int in_channels = 4;  // stacked depth frames
    int in_rows = 32;
    int in_cols = 32;
    std::array<int, 3> conv_channels{8, 16, 32};
    std::array<int, 3> conv_kernel{4, 4, 4};
    std::array<int, 3> conv_stride{2, 2, 2};
    int proprio_dim = 24;     // stacked proprio snapshots, flattened
    int proprio_hidden = 64;  // first proprio-encoder layer
    int feature_dim = 256;    // per-modality embedding width
    int head_hidden = 64;
    int action_dim = 2;
    // Zero visual feature, conv stack unused (the depth input is ignored).
    bool state_only = false;
    double logstd_init = -0.5;
    // Per-element scale applied to the proprio input (empty = all ones).
    std::vector<double> proprio_scale;

    int conv_rows(int layer) const;  // output height after `layer` convs
    int conv_cols(int layer) const;
    int flat_dim() const;  // conv output size feeding the projection
    void validate() const;
};

// Input scale for the 8-sample proprio snapshot layout
// (vx, vy, heading, yaw_rate, action0, action1, sin, cos) x history.
std::vector<double> default_proprio_scale(int history);

struct ParamBlock {
    std::string name;
    std::vector<int> shape;
    std::vector<double> w;  // parameters
    std::vector<double> g;  // gradient accumulator
    std::vector<double> m;  // Adam first moment
    std::vector<double> v;  // Adam second moment

    std::size_t size() const { return w.size(); }
};

// Policy mean/log-std and value estimate for one observation.
struct PolicyOutput {
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 2> log_std{0.0, 0.0};
    double value = 0.0;
};

// Diagonal-Gaussian log density and entropy. log_std is already clamped.
double gaussian_log_prob(const double* mean, const double* log_std,
                         const double* action, int dim);
double gaussian_entropy(const double* log_std, int dim);

// Actor-critic with one shared visual encoder (3 convs + projection),
// separate 2-layer proprio encoders, and 2-layer policy/value heads; tanh
// everywhere; learned state-independent log-std clamped to [-5, 2].
//
// Dense math runs through gemm; convolutions are im2col per sample. The
// depth input is normalized to [0, 1] with the world's [0.3, 10] clip range
// inside forward, proprio by the configured scale vector.
class Network {
public:
    Network(const ArchConfig& arch, std::uint64_t init_seed);

    // Batched fused forward. proprio is batch x proprio_dim, depth is
    // batch x (in_channels*in_rows*in_cols), both row-major. The returned
    // pointers view workspace memory valid until the next forward. With
    // record = true the activations are kept for one backward pass; the
    // caller must keep proprio/depth alive until then.
    struct Result {
        const double* mean;   // batch x action_dim
        const double* value;  // batch
    };
    Result forward(int batch, const double* proprio, const double* depth,
                   bool record);

    PolicyOutput forward_one(const std::vector<double>& proprio,
                             const std::vector<double>& depth);

    // Accumulates parameter gradients for d(loss)/d(mean) (batch x
    // action_dim) and d(loss)/d(value) (batch). Requires a recorded
    // forward of the same batch; throws std::logic_error otherwise.
    void backward(int batch, const double* dmean, const double* dvalue);

    void zero_grad();
    // One Adam step over every block; `step` starts at 1 for bias correction.
    void adam_step(double lr, double beta1, double beta2, double eps);

    double log_std(int i) const;             // clamped to [-5, 2]
    void add_log_std_grad(int i, double g);  // masked outside the clamp range

    std::vector<ParamBlock>& blocks() { return blocks_; }
    const std::vector<ParamBlock>& blocks() const { return blocks_; }
    ParamBlock& block(const std::string& name);
    const ArchConfig& arch() const { return arch_; }
    std::int64_t adam_steps() const { return adam_t_; }
    void set_adam_steps(std::int64_t t) { adam_t_ = t; }
    std::size_t parameter_count() const;

private:
    void fc_forward(const ParamBlock& w, const ParamBlock& b, int batch,
                    const double* in, double* out, bool activate);
    // dOut is the gradient at the (post-activation) output; returns the
    // gradient at the input in dIn (may be null to skip).
    void fc_backward(ParamBlock& w, ParamBlock& b, int batch, const double* in,
                     const double* out, double* dout, double* din,
                     bool activated);
    void conv_forward(int layer, int batch, const double* in, double* out);
    void conv_backward(int layer, int batch, const double* in,
                       const double* out, double* dout, double* din);
    void im2col(int layer, const double* in, double* col) const;
    void col2im_add(int layer, const double* col, double* din) const;

    ArchConfig arch_;
    std::vector<ParamBlock> blocks_;
    std::int64_t adam_t_ = 0;

    // Workspace (sized lazily to the largest batch seen).
    int ws_batch_ = 0;
    bool recorded_ = false;
    int recorded_batch_ = 0;
    std::vector<double> norm_proprio_, norm_depth_;
    std::vector<double> conv_out_[3];
    std::vector<double> vis_feat_, pi_h1_, pi_feat_, vf_h1_, vf_feat_;
    std::vector<double> cat_pi_, cat_vf_, pi_head1_, vf_head1_;
    std::vector<double> mean_, value_;
    std::vector<double> col_, dcol_;
    std::array<std::vector<double>, 10> dbuf_;  // backward scratch
};

}  // namespace mmdr::nn
