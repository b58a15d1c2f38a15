#pragma once

#include <random>
#include <string>
#include <vector>

#include "peg/config.hpp"
#include "peg/ops.hpp"
#include "peg/params.hpp"

namespace peg {

// Standard 4-gate recurrent cell (input/forget/output/candidate).
struct LstmCell {
    ad::TensorPtr w_i, u_i, b_i;
    ad::TensorPtr w_f, u_f, b_f;
    ad::TensorPtr w_o, u_o, b_o;
    ad::TensorPtr w_c, u_c, b_c;
    int input_dim = 0;
    int hidden_dim = 0;

    static LstmCell create(const std::string& prefix, int input_dim, int hidden_dim,
                           ad::ParamStore& params, std::mt19937_64& init_rng);

    struct State {
        ad::TensorPtr h;
        ad::TensorPtr c;
    };
    State zero_state() const;
    State step(ad::Tape& tape, const ad::TensorPtr& x, const State& prev) const;
};

// Long/short-term preference encoders over a user's history of topic vectors,
// fused and projected to the GNN input width.
class PreferenceEncoder {
public:
    PreferenceEncoder(const TrainConfig& cfg, const VariantFlags& variant,
                      ad::ParamStore& params, std::mt19937_64& init_rng);

    int long_dim() const { return long_dim_; }
    int fused_dim() const { return long_dim_ + d_short_; }
    int output_dim() const { return d_gnn_; }

    // history: chronological theta vectors, each K-dim. Requires >= 1 item.
    ad::TensorPtr bilstm_long_term(ad::Tape& tape,
                                   const std::vector<ad::TensorPtr>& history) const;
    ad::TensorPtr asvd_long_term(ad::Tape& tape, const std::vector<ad::TensorPtr>& history,
                                 ad::TensorPtr* attention = nullptr) const;
    ad::TensorPtr lstm_short_term(ad::Tape& tape,
                                  const std::vector<ad::TensorPtr>& history) const;

    ad::TensorPtr fuse(ad::Tape& tape, const ad::TensorPtr& p_long,
                       const ad::TensorPtr& p_short) const;

    // Full pipeline honoring the variant flags: empty histories (and the
    // peg-d variant) fall back to the shared trainable vectors; ablated
    // components are replaced by zero vectors.
    ad::TensorPtr embed(ad::Tape& tape, const std::vector<ad::TensorPtr>& history) const;

    const VariantFlags& variant() const { return variant_; }

    LstmCell fwd_cell, bwd_cell, short_cell;
    ad::TensorPtr asvd_w_h, asvd_b_h, asvd_w_x, asvd_b_x;
    ad::TensorPtr fuse_w, fuse_b;
    ad::TensorPtr fallback_long, fallback_short;

private:
    VariantFlags variant_;
    int topics_;
    int d_long_;
    int d_short_;
    int d_gnn_;
    int long_dim_;  // 2*d_long for bilstm, d_long for asvd
    int short_window_;
};

}  // namespace peg
