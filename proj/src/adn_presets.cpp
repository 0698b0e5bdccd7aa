#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "oneshot/adn.hpp"

namespace oneshot {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_pmf(const std::vector<double>& p, const std::string& what) {
  require(!p.empty(), what + ": empty");
  double s = 0.0;
  for (double v : p) {
    require(v >= 0.0 && std::isfinite(v), what + ": bad entry");
    s += v;
  }
  require(std::abs(s - 1.0) <= 1e-9, what + ": does not sum to 1");
}

void check_matrix(const Matrix& m, std::size_t rows, std::size_t cols,
                  const std::string& what) {
  require(m.size() == rows, what + ": wrong number of rows");
  for (const auto& r : m) {
    require(r.size() == cols, what + ": wrong row length");
    check_pmf(r, what);
  }
}

void check_map(const IndexMap& m, std::size_t rows, std::size_t cols,
               std::size_t range, const std::string& what) {
  require(m.size() == rows, what + ": wrong number of rows");
  for (const auto& r : m) {
    require(r.size() == cols, what + ": wrong row length");
    for (std::size_t v : r) require(v < range, what + ": value out of range");
  }
}

std::size_t row_width(const Matrix& m, const std::string& what) {
  require(!m.empty() && !m[0].empty(), what + ": empty");
  return m[0].size();
}

void fill_uniform(std::span<double> out) {
  std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
}

void fill_delta(std::span<double> out, std::size_t at) {
  std::fill(out.begin(), out.end(), 0.0);
  out[at] = 1.0;
}

void copy_row(std::span<double> out, const std::vector<double>& row) {
  std::copy(row.begin(), row.end(), out.begin());
}

NodeCoding trivial_u() {
  NodeCoding c;
  c.u_size = 1;
  c.enc_u = [](Symbol, std::span<const Symbol>, std::span<double> out) { out[0] = 1.0; };
  return c;
}

// Message source: Y = M uniform on [L], U = (x, m) with index x * L + m and
// law P_X(x) on the matching message, X = x.
void message_encoder(Network& net, CodingSpec& spec, const std::vector<double>& p_x,
                     std::size_t L) {
  const std::size_t nx = p_x.size();
  AdnNode n;
  n.x_size = nx;
  n.y_size = L;
  n.channel = [](std::span<const Symbol>, std::span<const Symbol>, std::span<double> out) {
    fill_uniform(out);
  };
  NodeCoding c;
  c.u_size = nx * L;
  c.enc_u = [p_x, L](Symbol m, std::span<const Symbol>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t x = 0; x < p_x.size(); ++x) out[x * L + m] = p_x[x];
  };
  c.enc_x = [L](Symbol, Symbol u, std::span<const Symbol>, std::span<double> out) {
    fill_delta(out, u / L);
  };
  net.nodes.push_back(std::move(n));
  spec.nodes.push_back(std::move(c));
}

// 2^{-iota} style ratios below are written as plain probability ratios.
double safe_ratio(double a, double b) { return b > 0.0 ? a / b : INFINITY; }

}  // namespace

AdnProblem build_p2p(const std::vector<double>& p_x, const Matrix& channel,
                     std::size_t L) {
  require(L >= 1, "p2p: L must be >= 1");
  check_pmf(p_x, "p2p: P_X");
  const std::size_t ny = row_width(channel, "p2p: channel");
  check_matrix(channel, p_x.size(), ny, "p2p: channel");

  AdnProblem pr;
  pr.name = "p2p";
  message_encoder(pr.net, pr.spec, p_x, L);

  AdnNode dec;
  dec.x_size = L;
  dec.y_size = ny;
  dec.channel = [channel](std::span<const Symbol> xs, std::span<const Symbol>,
                          std::span<double> out) { copy_row(out, channel[xs[0]]); };
  NodeCoding c = trivial_u();
  c.decode = {0};
  c.unique = 1;
  c.enc_x = [L](Symbol, Symbol, std::span<const Symbol> ubar, std::span<double> out) {
    fill_delta(out, ubar[0] % L);
  };
  pr.net.nodes.push_back(std::move(dec));
  pr.spec.nodes.push_back(std::move(c));
  pr.error = [](std::span<const Symbol> xs, std::span<const Symbol> ys) {
    return xs[1] != ys[0];
  };
  return pr;
}

AdnProblem build_gelfand_pinsker(const std::vector<double>& p_s,
                                 const Matrix& p_u_given_s, const IndexMap& x_of,
                                 const Matrix& channel, std::size_t L) {
  require(L >= 1, "gelfand_pinsker: L must be >= 1");
  check_pmf(p_s, "gelfand_pinsker: P_S");
  const std::size_t ns = p_s.size();
  const std::size_t nu = row_width(p_u_given_s, "gelfand_pinsker: P_U|S");
  check_matrix(p_u_given_s, ns, nu, "gelfand_pinsker: P_U|S");
  require(channel.size() % ns == 0 && !channel.empty(),
          "gelfand_pinsker: channel rows must be |X| * |S|");
  const std::size_t nx = channel.size() / ns;
  const std::size_t ny = row_width(channel, "gelfand_pinsker: channel");
  check_matrix(channel, nx * ns, ny, "gelfand_pinsker: channel");
  check_map(x_of, nu, ns, nx, "gelfand_pinsker: x(u,s)");

  AdnProblem pr;
  pr.name = "gelfand_pinsker";
  AdnNode enc;
  enc.x_size = nx;
  enc.y_size = L * ns;
  enc.channel = [p_s, L](std::span<const Symbol>, std::span<const Symbol>,
                         std::span<double> out) {
    const std::size_t ns = p_s.size();
    for (std::size_t m = 0; m < L; ++m)
      for (std::size_t s = 0; s < ns; ++s)
        out[m * ns + s] = p_s[s] / static_cast<double>(L);
  };
  NodeCoding ce;
  ce.u_size = nu * L;
  ce.enc_u = [p_u_given_s, ns, L](Symbol y, std::span<const Symbol>, std::span<double> out) {
    const std::size_t m = y / ns, s = y % ns;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t u = 0; u < p_u_given_s[s].size(); ++u)
      out[u * L + m] = p_u_given_s[s][u];
  };
  ce.enc_x = [x_of, ns, L](Symbol y, Symbol u, std::span<const Symbol>, std::span<double> out) {
    fill_delta(out, x_of[u / L][y % ns]);
  };
  pr.net.nodes.push_back(std::move(enc));
  pr.spec.nodes.push_back(std::move(ce));

  AdnNode dec;
  dec.x_size = L;
  dec.y_size = ny;
  dec.channel = [channel, ns](std::span<const Symbol> xs, std::span<const Symbol> ys,
                              std::span<double> out) {
    copy_row(out, channel[xs[0] * ns + ys[0] % ns]);
  };
  NodeCoding cd = trivial_u();
  cd.decode = {0};
  cd.unique = 1;
  cd.enc_x = [L](Symbol, Symbol, std::span<const Symbol> ubar, std::span<double> out) {
    fill_delta(out, ubar[0] % L);
  };
  pr.net.nodes.push_back(std::move(dec));
  pr.spec.nodes.push_back(std::move(cd));
  pr.error = [ns](std::span<const Symbol> xs, std::span<const Symbol> ys) {
    return xs[1] != ys[0] / ns;
  };
  return pr;
}

namespace {

// Shared skeleton of Wyner-Ziv and coding for computing: the target symbol
// for the distortion check is target(x, t).
AdnProblem build_side_info_source(const std::string& name,
                                  const std::vector<double>& p_x,
                                  const Matrix& p_t_given_x,
                                  const Matrix& p_u_given_x, const IndexMap& z_of,
                                  std::size_t L, const Matrix& dist, double D,
                                  const IndexMap* f) {
  require(L >= 1, name + ": L must be >= 1");
  check_pmf(p_x, name + ": P_X");
  const std::size_t nx = p_x.size();
  const std::size_t nt = row_width(p_t_given_x, name + ": P_T|X");
  const std::size_t nu = row_width(p_u_given_x, name + ": P_U|X");
  check_matrix(p_t_given_x, nx, nt, name + ": P_T|X");
  check_matrix(p_u_given_x, nx, nu, name + ": P_U|X");
  require(!z_of.empty() && !z_of[0].empty(), name + ": z(u,t) empty");
  require(!dist.empty() && !dist[0].empty(), name + ": distortion empty");
  const std::size_t nz = dist[0].size();
  check_map(z_of, nu, nt, nz, name + ": z(u,t)");
  std::size_t ntarget = nx;
  if (f) {
    require(!f->empty() && !(*f)[0].empty(), name + ": f empty");
    ntarget = dist.size();
    check_map(*f, nx, nt, ntarget, name + ": f(x,t)");
  }
  require(dist.size() == ntarget, name + ": distortion rows must match the target alphabet");
  for (const auto& r : dist) require(r.size() == nz, name + ": ragged distortion");

  AdnProblem pr;
  pr.name = name;
  AdnNode enc;
  enc.x_size = L;
  enc.y_size = nx;
  enc.channel = [p_x](std::span<const Symbol>, std::span<const Symbol>,
                      std::span<double> out) { copy_row(out, p_x); };
  NodeCoding ce;
  ce.u_size = nu * L;
  ce.enc_u = [p_u_given_x, L](Symbol x, std::span<const Symbol>, std::span<double> out) {
    const double inv = 1.0 / static_cast<double>(L);
    for (std::size_t u = 0; u < p_u_given_x[x].size(); ++u)
      for (std::size_t m = 0; m < L; ++m) out[u * L + m] = p_u_given_x[x][u] * inv;
  };
  ce.enc_x = [L](Symbol, Symbol u, std::span<const Symbol>, std::span<double> out) {
    fill_delta(out, u % L);
  };
  pr.net.nodes.push_back(std::move(enc));
  pr.spec.nodes.push_back(std::move(ce));

  AdnNode dec;
  dec.x_size = nz;
  dec.y_size = L * nt;
  dec.channel = [p_t_given_x, nt](std::span<const Symbol> xs, std::span<const Symbol> ys,
                                  std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t t = 0; t < nt; ++t) out[xs[0] * nt + t] = p_t_given_x[ys[0]][t];
  };
  NodeCoding cd = trivial_u();
  cd.decode = {0};
  cd.unique = 1;
  cd.enc_x = [z_of, nt, L](Symbol y, Symbol, std::span<const Symbol> ubar,
                           std::span<double> out) {
    fill_delta(out, z_of[ubar[0] / L][y % nt]);
  };
  pr.net.nodes.push_back(std::move(dec));
  pr.spec.nodes.push_back(std::move(cd));

  if (f) {
    pr.error = [f = *f, dist, D, nt](std::span<const Symbol> xs, std::span<const Symbol> ys) {
      return dist[f[ys[0]][ys[1] % nt]][xs[1]] > D;
    };
  } else {
    pr.error = [dist, D](std::span<const Symbol> xs, std::span<const Symbol> ys) {
      return dist[ys[0]][xs[1]] > D;
    };
  }
  return pr;
}

}  // namespace

AdnProblem build_wyner_ziv(const std::vector<double>& p_x, const Matrix& p_t_given_x,
                           const Matrix& p_u_given_x, const IndexMap& z_of,
                           std::size_t L, const Matrix& dist, double D) {
  return build_side_info_source("wyner_ziv", p_x, p_t_given_x, p_u_given_x, z_of, L,
                                dist, D, nullptr);
}

AdnProblem build_coding_for_computing(const IndexMap& f, const std::vector<double>& p_x,
                                      const Matrix& p_t_given_x,
                                      const Matrix& p_u_given_x, const IndexMap& z_of,
                                      std::size_t L, const Matrix& dist, double D) {
  return build_side_info_source("coding_for_computing", p_x, p_t_given_x, p_u_given_x,
                                z_of, L, dist, D, &f);
}

AdnProblem build_mac(const std::vector<double>& p_x1, const std::vector<double>& p_x2,
                     const Matrix& channel, std::size_t L1, std::size_t L2) {
  require(L1 >= 1 && L2 >= 1, "mac: L1, L2 must be >= 1");
  check_pmf(p_x1, "mac: P_X1");
  check_pmf(p_x2, "mac: P_X2");
  const std::size_t n2 = p_x2.size();
  const std::size_t ny = row_width(channel, "mac: channel");
  check_matrix(channel, p_x1.size() * n2, ny, "mac: channel");

  AdnProblem pr;
  pr.name = "mac";
  message_encoder(pr.net, pr.spec, p_x1, L1);
  message_encoder(pr.net, pr.spec, p_x2, L2);

  AdnNode dec;
  dec.x_size = L1 * L2;
  dec.y_size = ny;
  dec.channel = [channel, n2](std::span<const Symbol> xs, std::span<const Symbol>,
                              std::span<double> out) {
    copy_row(out, channel[xs[0] * n2 + xs[1]]);
  };
  NodeCoding c = trivial_u();
  c.decode = {1, 0};
  c.unique = 2;
  c.enc_x = [L1, L2](Symbol, Symbol, std::span<const Symbol> ubar, std::span<double> out) {
    fill_delta(out, (ubar[1] % L1) * L2 + ubar[0] % L2);
  };
  pr.net.nodes.push_back(std::move(dec));
  pr.spec.nodes.push_back(std::move(c));
  pr.error = [L2](std::span<const Symbol> xs, std::span<const Symbol> ys) {
    return xs[2] != ys[0] * L2 + ys[1];
  };
  return pr;
}

AdnProblem build_broadcast(const Matrix& p_u1u2, const IndexMap& x_of,
                           const Matrix& channel, std::size_t y1_size,
                           std::size_t L1, std::size_t L2) {
  require(L1 >= 1 && L2 >= 1, "broadcast: L1, L2 must be >= 1");
  require(!p_u1u2.empty() && !p_u1u2[0].empty(), "broadcast: P_U1U2 empty");
  const std::size_t n1 = p_u1u2.size(), n2 = p_u1u2[0].size();
  std::vector<double> p_u1(n1, 0.0);
  Matrix p_u2_given_u1(n1, std::vector<double>(n2, 0.0));
  double total = 0.0;
  for (std::size_t a = 0; a < n1; ++a) {
    require(p_u1u2[a].size() == n2, "broadcast: ragged P_U1U2");
    for (std::size_t b = 0; b < n2; ++b) {
      require(p_u1u2[a][b] >= 0.0, "broadcast: negative mass");
      p_u1[a] += p_u1u2[a][b];
    }
    total += p_u1[a];
  }
  require(std::abs(total - 1.0) <= 1e-9, "broadcast: P_U1U2 does not sum to 1");
  for (std::size_t a = 0; a < n1; ++a) {
    require(p_u1[a] > 0.0, "broadcast: U1 symbol with zero mass");
    for (std::size_t b = 0; b < n2; ++b) p_u2_given_u1[a][b] = p_u1u2[a][b] / p_u1[a];
  }
  require(y1_size >= 1, "broadcast: y1_size must be >= 1");
  const std::size_t nyy = row_width(channel, "broadcast: channel");
  require(nyy % y1_size == 0, "broadcast: channel width must be |Y1| * |Y2|");
  const std::size_t ny2 = nyy / y1_size;
  const std::size_t nx = channel.size();
  check_matrix(channel, nx, nyy, "broadcast: channel");
  check_map(x_of, n1, n2, nx, "broadcast: x(u1,u2)");

  AdnProblem pr;
  pr.name = "broadcast";
  AdnNode e1;
  e1.x_size = n1;
  e1.y_size = L1;
  e1.channel = [](std::span<const Symbol>, std::span<const Symbol>, std::span<double> out) {
    fill_uniform(out);
  };
  NodeCoding c1;
  c1.u_size = n1 * L1;
  c1.enc_u = [p_u1, L1](Symbol m, std::span<const Symbol>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t a = 0; a < p_u1.size(); ++a) out[a * L1 + m] = p_u1[a];
  };
  c1.enc_x = [L1](Symbol, Symbol u, std::span<const Symbol>, std::span<double> out) {
    fill_delta(out, u / L1);
  };
  pr.net.nodes.push_back(std::move(e1));
  pr.spec.nodes.push_back(std::move(c1));

  AdnNode e2;
  e2.x_size = nx;
  e2.y_size = L2 * n1;
  e2.channel = [L2, n1](std::span<const Symbol> xs, std::span<const Symbol>,
                        std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t m = 0; m < L2; ++m) out[m * n1 + xs[0]] = 1.0 / static_cast<double>(L2);
  };
  NodeCoding c2;
  c2.u_size = n2 * L2;
  c2.enc_u = [p_u2_given_u1, n1, L2](Symbol y, std::span<const Symbol>,
                                     std::span<double> out) {
    const std::size_t m = y / n1, a = y % n1;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t b = 0; b < p_u2_given_u1[a].size(); ++b)
      out[b * L2 + m] = p_u2_given_u1[a][b];
  };
  c2.enc_x = [x_of, n1, L2](Symbol y, Symbol u, std::span<const Symbol>,
                            std::span<double> out) {
    fill_delta(out, x_of[y % n1][u / L2]);
  };
  pr.net.nodes.push_back(std::move(e2));
  pr.spec.nodes.push_back(std::move(c2));

  AdnNode d1;
  d1.x_size = L1;
  d1.y_size = y1_size;
  d1.channel = [channel, y1_size, ny2](std::span<const Symbol> xs, std::span<const Symbol>,
                                       std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t a = 0; a < y1_size; ++a)
      for (std::size_t b = 0; b < ny2; ++b) out[a] += channel[xs[1]][a * ny2 + b];
  };
  NodeCoding cd1 = trivial_u();
  cd1.decode = {0};
  cd1.unique = 1;
  cd1.enc_x = [L1](Symbol, Symbol, std::span<const Symbol> ubar, std::span<double> out) {
    fill_delta(out, ubar[0] % L1);
  };
  pr.net.nodes.push_back(std::move(d1));
  pr.spec.nodes.push_back(std::move(cd1));

  AdnNode d2;
  d2.x_size = L2;
  d2.y_size = ny2;
  d2.channel = [channel, ny2](std::span<const Symbol> xs, std::span<const Symbol> ys,
                              std::span<double> out) {
    const auto& row = channel[xs[1]];
    double s = 0.0;
    for (std::size_t b = 0; b < ny2; ++b) s += (out[b] = row[ys[2] * ny2 + b]);
    for (std::size_t b = 0; b < ny2; ++b) out[b] /= s;
  };
  NodeCoding cd2 = trivial_u();
  cd2.decode = {1};
  cd2.unique = 1;
  cd2.enc_x = [L2](Symbol, Symbol, std::span<const Symbol> ubar, std::span<double> out) {
    fill_delta(out, ubar[0] % L2);
  };
  pr.net.nodes.push_back(std::move(d2));
  pr.spec.nodes.push_back(std::move(cd2));

  pr.error = [n1](std::span<const Symbol> xs, std::span<const Symbol> ys) {
    return xs[2] != ys[0] || xs[3] != ys[1] / n1;
  };
  return pr;
}

AdnProblem build_relay(const std::vector<double>& p_x, const Matrix& p_yr_given_x,
                       const Matrix& p_u_given_yr, const IndexMap& xr_of,
                       std::size_t xr_size, const Matrix& channel, std::size_t L) {
  require(L >= 1, "relay: L must be >= 1");
  check_pmf(p_x, "relay: P_X");
  const std::size_t nx = p_x.size();
  const std::size_t nyr = row_width(p_yr_given_x, "relay: P_Yr|X");
  check_matrix(p_yr_given_x, nx, nyr, "relay: P_Yr|X");
  const std::size_t nu = row_width(p_u_given_yr, "relay: P_U|Yr");
  check_matrix(p_u_given_yr, nyr, nu, "relay: P_U|Yr");
  require(xr_size >= 1, "relay: xr_size must be >= 1");
  check_map(xr_of, nyr, nu, xr_size, "relay: x_r(yr,u)");
  const std::size_t ny = row_width(channel, "relay: channel");
  check_matrix(channel, nx * nyr * xr_size, ny, "relay: channel");

  AdnProblem pr;
  pr.name = "relay";
  message_encoder(pr.net, pr.spec, p_x, L);

  AdnNode r;
  r.x_size = xr_size;
  r.y_size = nyr;
  r.channel = [p_yr_given_x](std::span<const Symbol> xs, std::span<const Symbol>,
                             std::span<double> out) { copy_row(out, p_yr_given_x[xs[0]]); };
  NodeCoding cr;
  cr.u_size = nu;
  cr.enc_u = [p_u_given_yr](Symbol yr, std::span<const Symbol>, std::span<double> out) {
    copy_row(out, p_u_given_yr[yr]);
  };
  cr.enc_x = [xr_of](Symbol yr, Symbol u, std::span<const Symbol>, std::span<double> out) {
    fill_delta(out, xr_of[yr][u]);
  };
  pr.net.nodes.push_back(std::move(r));
  pr.spec.nodes.push_back(std::move(cr));

  AdnNode dec;
  dec.x_size = L;
  dec.y_size = ny;
  dec.channel = [channel, nyr, xr_size](std::span<const Symbol> xs,
                                        std::span<const Symbol> ys, std::span<double> out) {
    copy_row(out, channel[(xs[0] * nyr + ys[1]) * xr_size + xs[1]]);
  };
  NodeCoding cd = trivial_u();
  cd.decode = {0, 1};
  cd.unique = 1;
  cd.enc_x = [L](Symbol, Symbol, std::span<const Symbol> ubar, std::span<double> out) {
    fill_delta(out, ubar[0] % L);
  };
  pr.net.nodes.push_back(std::move(dec));
  pr.spec.nodes.push_back(std::move(cd));
  pr.error = [](std::span<const Symbol> xs, std::span<const Symbol> ys) {
    return xs[2] != ys[0];
  };
  return pr;
}

AdnProblem build_cascade(const std::vector<double>& p_x, const Matrix& p_y_given_x,
                         const Matrix& p_uv_given_x, std::size_t u_size,
                         const Matrix& p_z_given_yuv, std::size_t L1, std::size_t L2,
                         std::size_t L3, const Matrix& dist, double D) {
  require(L1 >= 1 && L2 >= 1 && L3 >= 1, "cascade: L1, L2, L3 must be >= 1");
  check_pmf(p_x, "cascade: P_X");
  const std::size_t nx = p_x.size();
  const std::size_t ny = row_width(p_y_given_x, "cascade: P_Y|X");
  check_matrix(p_y_given_x, nx, ny, "cascade: P_Y|X");
  const std::size_t nuv = row_width(p_uv_given_x, "cascade: P_UV|X");
  require(u_size >= 1 && nuv % u_size == 0, "cascade: P_UV|X width must be |U| * |V|");
  const std::size_t nu = u_size, nv = nuv / u_size;
  check_matrix(p_uv_given_x, nx, nuv, "cascade: P_UV|X");
  const std::size_t nz = row_width(p_z_given_yuv, "cascade: P_Z|YUV");
  check_matrix(p_z_given_yuv, ny * nu * nv, nz, "cascade: P_Z|YUV");
  require(dist.size() == nx * ny, "cascade: distortion rows must be |X| * |Y|");
  for (const auto& r : dist) require(r.size() == nz, "cascade: distortion width must be |Z|");

  Matrix p_u_given_x(nx, std::vector<double>(nu, 0.0));
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t v = 0; v < nv; ++v) p_u_given_x[x][u] += p_uv_given_x[x][u * nv + v];

  AdnProblem pr;
  pr.name = "cascade";

  // Node 0: first half of encoder a. Sees X, picks (U, M2), passes both on.
  AdnNode n0;
  n0.x_size = nu * L2;
  n0.y_size = nx;
  n0.channel = [p_x](std::span<const Symbol>, std::span<const Symbol>,
                     std::span<double> out) { copy_row(out, p_x); };
  NodeCoding c0;
  c0.u_size = nu * L2;
  c0.enc_u = [p_u_given_x, L2](Symbol x, std::span<const Symbol>, std::span<double> out) {
    const double inv = 1.0 / static_cast<double>(L2);
    for (std::size_t u = 0; u < p_u_given_x[x].size(); ++u)
      for (std::size_t m = 0; m < L2; ++m) out[u * L2 + m] = p_u_given_x[x][u] * inv;
  };
  c0.enc_x = [](Symbol, Symbol u, std::span<const Symbol>, std::span<double> out) {
    fill_delta(out, u);
  };
  pr.net.nodes.push_back(std::move(n0));
  pr.spec.nodes.push_back(std::move(c0));

  // Node 1: second half of encoder a. Sees (X, U, M2), picks (V, M1), sends (M1, M2).
  AdnNode n1;
  n1.x_size = L1 * L2;
  n1.y_size = nx * nu * L2;
  n1.channel = [nu, L2](std::span<const Symbol> xs, std::span<const Symbol> ys,
                        std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[ys[0] * nu * L2 + xs[0]] = 1.0;
  };
  NodeCoding c1;
  c1.u_size = nv * L1;
  c1.enc_u = [p_uv_given_x, p_u_given_x, nu, nv, L1, L2](Symbol y, std::span<const Symbol>,
                                                       std::span<double> out) {
    const std::size_t x = y / (nu * L2), u = (y / L2) % nu;
    const double pu = p_u_given_x[x][u];
    const double inv = 1.0 / static_cast<double>(L1);
    for (std::size_t v = 0; v < nv; ++v) {
      const double pv = pu > 0.0 ? p_uv_given_x[x][u * nv + v] / pu : 1.0 / static_cast<double>(nv);
      for (std::size_t m = 0; m < L1; ++m) out[v * L1 + m] = pv * inv;
    }
  };
  c1.enc_x = [L1, L2](Symbol y, Symbol u, std::span<const Symbol>, std::span<double> out) {
    fill_delta(out, (u % L1) * L2 + y % L2);
  };
  pr.net.nodes.push_back(std::move(n1));
  pr.spec.nodes.push_back(std::move(c1));

  // Node 2: encoder b. Sees (Y, M1, M2); decodes V then U; picks (Z, M3).
  AdnNode n2;
  n2.x_size = L2 * L3;
  n2.y_size = ny * L1 * L2;
  n2.channel = [p_y_given_x, L1, L2](std::span<const Symbol> xs, std::span<const Symbol> ys,
                                     std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const auto& row = p_y_given_x[ys[0]];
    for (std::size_t y = 0; y < row.size(); ++y) out[y * L1 * L2 + xs[1]] = row[y];
  };
  NodeCoding c2;
  c2.decode = {1, 0};
  c2.unique = 2;
  c2.u_size = nz * L3;
  c2.enc_u = [p_z_given_yuv, nu, nv, L1, L2, L3](Symbol y, std::span<const Symbol> ubar,
                                                 std::span<double> out) {
    const std::size_t yy = y / (L1 * L2);
    const std::size_t v = ubar[0] / L1, u = ubar[1] / L2;
    const auto& row = p_z_given_yuv[(yy * nu + u) * nv + v];
    const double inv = 1.0 / static_cast<double>(L3);
    for (std::size_t z = 0; z < row.size(); ++z)
      for (std::size_t m = 0; m < L3; ++m) out[z * L3 + m] = row[z] * inv;
  };
  c2.enc_x = [L2, L3](Symbol y, Symbol u, std::span<const Symbol>, std::span<double> out) {
    fill_delta(out, (y % L2) * L3 + u % L3);
  };
  pr.net.nodes.push_back(std::move(n2));
  pr.spec.nodes.push_back(std::move(c2));

  // Node 3: decoder. Sees (M2, M3); decodes (Z, M3) with U as a soft helper.
  AdnNode n3;
  n3.x_size = nz;
  n3.y_size = L2 * L3;
  n3.channel = [](std::span<const Symbol> xs, std::span<const Symbol>,
                  std::span<double> out) { fill_delta(out, xs[2]); };
  NodeCoding c3 = trivial_u();
  c3.decode = {2, 0};
  c3.unique = 1;
  c3.enc_x = [L3](Symbol, Symbol, std::span<const Symbol> ubar, std::span<double> out) {
    fill_delta(out, ubar[0] / L3);
  };
  pr.net.nodes.push_back(std::move(n3));
  pr.spec.nodes.push_back(std::move(c3));

  pr.error = [dist, D, ny, L1, L2](std::span<const Symbol> xs, std::span<const Symbol> ys) {
    const std::size_t y = ys[2] / (L1 * L2);
    return dist[ys[0] * ny + y][xs[3]] > D;
  };
  return pr;
}

// ---- Corollary bounds by direct enumeration ----

double p2p_corollary_bound(const std::vector<double>& p_x, const Matrix& channel,
                           std::size_t L) {
  check_pmf(p_x, "p2p: P_X");
  const std::size_t ny = row_width(channel, "p2p: channel");
  check_matrix(channel, p_x.size(), ny, "p2p: channel");
  std::vector<double> p_y(ny, 0.0);
  for (std::size_t x = 0; x < p_x.size(); ++x)
    for (std::size_t y = 0; y < ny; ++y) p_y[y] += p_x[x] * channel[x][y];
  double total = 0.0;
  for (std::size_t x = 0; x < p_x.size(); ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      const double p = p_x[x] * channel[x][y];
      if (p <= 0.0) continue;
      // L * 2^{-iota(X;Y)}
      total += p * std::min(1.0, static_cast<double>(L) * p_y[y] / channel[x][y]);
    }
  return total;
}

double gelfand_pinsker_corollary_bound(const std::vector<double>& p_s,
                                       const Matrix& p_u_given_s, const IndexMap& x_of,
                                       const Matrix& channel, std::size_t L) {
  const std::size_t ns = p_s.size(), nu = p_u_given_s.at(0).size();
  const std::size_t ny = channel.at(0).size();
  // Joint of (s, u, y).
  std::vector<double> j(ns * nu * ny, 0.0), p_uy(nu * ny, 0.0), p_y(ny, 0.0);
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t y = 0; y < ny; ++y) {
        const double p = p_s[s] * p_u_given_s[s][u] * channel[x_of[u][s] * ns + s][y];
        j[(s * nu + u) * ny + y] = p;
        p_uy[u * ny + y] += p;
        p_y[y] += p;
      }
  double total = 0.0;
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t y = 0; y < ny; ++y) {
        const double p = j[(s * nu + u) * ny + y];
        if (p <= 0.0) continue;
        // L * 2^{-iota(U;Y) + iota(U;S)}
        const double term =
            static_cast<double>(L) * p_u_given_s[s][u] / (p_uy[u * ny + y] / p_y[y]);
        total += p * std::min(1.0, term);
      }
  return total;
}

double wyner_ziv_corollary_bound(const std::vector<double>& p_x, const Matrix& p_t_given_x,
                                 const Matrix& p_u_given_x, const IndexMap& z_of,
                                 std::size_t L, const Matrix& dist, double D) {
  const std::size_t nx = p_x.size(), nt = p_t_given_x.at(0).size();
  const std::size_t nu = p_u_given_x.at(0).size();
  std::vector<double> p_ut(nu * nt, 0.0), p_t(nt, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t t = 0; t < nt; ++t) {
        const double p = p_x[x] * p_u_given_x[x][u] * p_t_given_x[x][t];
        p_ut[u * nt + t] += p;
        p_t[t] += p;
      }
  double total = 0.0;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t t = 0; t < nt; ++t) {
        const double p = p_x[x] * p_u_given_x[x][u] * p_t_given_x[x][t];
        if (p <= 0.0) continue;
        const double e = dist[x][z_of[u][t]] > D ? 1.0 : 0.0;
        // L^{-1} 2^{iota(U;X) - iota(U;T)}
        const double term = p_u_given_x[x][u] /
                            (static_cast<double>(L) * p_ut[u * nt + t] / p_t[t]);
        total += p * std::min(1.0, e + term);
      }
  return total;
}

double mac_corollary_bound(const std::vector<double>& p_x1, const std::vector<double>& p_x2,
                           const Matrix& channel, std::size_t L1, std::size_t L2) {
  const std::size_t n1 = p_x1.size(), n2 = p_x2.size(), ny = channel.at(0).size();
  std::vector<double> p_y(ny, 0.0), p_x1y(n1 * ny, 0.0), p_x2y(n2 * ny, 0.0);
  for (std::size_t a = 0; a < n1; ++a)
    for (std::size_t b = 0; b < n2; ++b)
      for (std::size_t y = 0; y < ny; ++y) {
        const double p = p_x1[a] * p_x2[b] * channel[a * n2 + b][y];
        p_y[y] += p;
        p_x1y[a * ny + y] += p;
        p_x2y[b * ny + y] += p;
      }
  const double gamma = std::log(static_cast<double>(L1 * n1)) + 1.0;
  double total = 0.0;
  for (std::size_t a = 0; a < n1; ++a)
    for (std::size_t b = 0; b < n2; ++b)
      for (std::size_t y = 0; y < ny; ++y) {
        const double w = channel[a * n2 + b][y];
        const double p = p_x1[a] * p_x2[b] * w;
        if (p <= 0.0) continue;
        // 2^{-iota(X1,X2;Y)} = P(y) / P(y|x1,x2); 2^{-iota(X2;Y|X1)} = P(y|x1) / P(y|x1,x2).
        const double joint = static_cast<double>(L1 * L2) * safe_ratio(p_y[y], w);
        const double given1 = static_cast<double>(L2) * safe_ratio(p_x1y[a * ny + y] / p_x1[a], w);
        const double given2 = static_cast<double>(L1) * safe_ratio(p_x2y[b * ny + y] / p_x2[b], w);
        total += p * std::min(1.0, gamma * joint + gamma * given1 + given2);
      }
  return total;
}

double broadcast_corollary_bound(const Matrix& p_u1u2, const IndexMap& x_of,
                                 const Matrix& channel, std::size_t y1_size,
                                 std::size_t L1, std::size_t L2) {
  const std::size_t n1 = p_u1u2.size(), n2 = p_u1u2.at(0).size();
  const std::size_t ny2 = channel.at(0).size() / y1_size;
  std::vector<double> p_u1(n1, 0.0);
  for (std::size_t a = 0; a < n1; ++a)
    for (std::size_t b = 0; b < n2; ++b) p_u1[a] += p_u1u2[a][b];
  std::vector<double> p_y1(y1_size, 0.0), p_y2(ny2, 0.0);
  std::vector<double> p_u1y1(n1 * y1_size, 0.0), p_u2y2(n2 * ny2, 0.0);
  for (std::size_t a = 0; a < n1; ++a)
    for (std::size_t b = 0; b < n2; ++b)
      for (std::size_t c = 0; c < y1_size; ++c)
        for (std::size_t e = 0; e < ny2; ++e) {
          const double p = p_u1u2[a][b] * channel[x_of[a][b]][c * ny2 + e];
          p_y1[c] += p;
          p_y2[e] += p;
          p_u1y1[a * y1_size + c] += p;
          p_u2y2[b * ny2 + e] += p;
        }
  double total = 0.0;
  for (std::size_t a = 0; a < n1; ++a)
    for (std::size_t b = 0; b < n2; ++b)
      for (std::size_t c = 0; c < y1_size; ++c)
        for (std::size_t e = 0; e < ny2; ++e) {
          const double p = p_u1u2[a][b] * channel[x_of[a][b]][c * ny2 + e];
          if (p <= 0.0) continue;
          // L1 2^{-iota(U1;Y1)} + L2 2^{-iota(U2;Y2) + iota(U2;U1)}
          const double t1 = static_cast<double>(L1) * p_u1[a] / (p_u1y1[a * y1_size + c] / p_y1[c]);
          const double t2 = static_cast<double>(L2) * (p_u1u2[a][b] / p_u1[a]) /
                            (p_u2y2[b * ny2 + e] / p_y2[e]);
          total += p * std::min(1.0, t1 + t2);
        }
  return total;
}

double relay_corollary_bound(const std::vector<double>& p_x, const Matrix& p_yr_given_x,
                             const Matrix& p_u_given_yr, const IndexMap& xr_of,
                             std::size_t xr_size, const Matrix& channel, std::size_t L) {
  const std::size_t nx = p_x.size(), nyr = p_yr_given_x.at(0).size();
  const std::size_t nu = p_u_given_yr.at(0).size(), ny = channel.at(0).size();
  auto joint = [&](std::size_t x, std::size_t r, std::size_t u, std::size_t y) {
    return p_x[x] * p_yr_given_x[x][r] * p_u_given_yr[r][u] *
           channel[(x * nyr + r) * xr_size + xr_of[r][u]][y];
  };
  std::vector<double> p_y(ny, 0.0), p_uy(nu * ny, 0.0), p_xuy(nx * nu * ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t r = 0; r < nyr; ++r)
      for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t y = 0; y < ny; ++y) {
          const double p = joint(x, r, u, y);
          p_y[y] += p;
          p_uy[u * ny + y] += p;
          p_xuy[(x * nu + u) * ny + y] += p;
        }
  const double gamma = std::log(static_cast<double>(nu)) + 1.0;
  double total = 0.0;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t r = 0; r < nyr; ++r)
      for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t y = 0; y < ny; ++y) {
          const double p = joint(x, r, u, y);
          if (p <= 0.0) continue;
          // 2^{-iota(X;U,Y)} = P(x) / P(x|u,y); 2^{-iota(U;Y)+iota(U;Yr)} = P(u|yr) / P(u|y).
          const double ixuy = p_x[x] / (p_xuy[(x * nu + u) * ny + y] / p_uy[u * ny + y]);
          const double iu = p_u_given_yr[r][u] / (p_uy[u * ny + y] / p_y[y]);
          total += p * std::min(1.0, gamma * static_cast<double>(L) * ixuy * (iu + 1.0));
        }
  return total;
}

}  // namespace oneshot

namespace oneshot {

namespace {

// Symmetric channel on q symbols: correct with probability 1 - p, otherwise
// uniform over the other q - 1 symbols.
Matrix symmetric(std::size_t q, double p) {
  Matrix m(q, std::vector<double>(q, p / static_cast<double>(q - 1)));
  for (std::size_t i = 0; i < q; ++i) m[i][i] = 1.0 - p;
  return m;
}

double bsc(std::size_t in, std::size_t out, double p) { return in == out ? 1.0 - p : p; }

}  // namespace

const std::vector<std::string>& adn_preset_names() {
  static const std::vector<std::string> names = {
      "p2p", "gelfand_pinsker", "wyner_ziv", "mac", "broadcast", "relay", "cascade"};
  return names;
}

AdnPreset adn_preset(const std::string& name, double p, std::size_t L) {
  require(p > 0.0 && p < 0.5, "adn_preset: noise must lie in (0, 0.5)");
  require(L >= 1, "adn_preset: L must be >= 1");
  const std::vector<double> half = {0.5, 0.5};
  const double nan = std::numeric_limits<double>::quiet_NaN();

  if (name == "p2p") {
    // Quaternary symmetric channel with uniform input.
    const std::vector<double> px(4, 0.25);
    const Matrix ch = symmetric(4, p);
    return {build_p2p(px, ch, L), p2p_corollary_bound(px, ch, L)};
  }
  if (name == "gelfand_pinsker") {
    // Y = X xor S xor N with X = U xor S, U correlated with S.
    const Matrix pu = {{0.7, 0.3}, {0.3, 0.7}};
    const IndexMap x_of = {{0, 1}, {1, 0}};
    Matrix ch(4, std::vector<double>(2));
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t y = 0; y < 2; ++y) ch[x * 2 + s][y] = bsc(x ^ s, y, p);
    return {build_gelfand_pinsker(half, pu, x_of, ch, L),
            gelfand_pinsker_corollary_bound(half, pu, x_of, ch, L)};
  }
  if (name == "wyner_ziv") {
    // Side information and description are both BSC(p) views of X; the
    // decoder outputs U and fails when it differs from X.
    const Matrix pt = symmetric(2, p);
    const Matrix pu = symmetric(2, p);
    const IndexMap z_of = {{0, 0}, {1, 1}};
    const Matrix dist = {{0.0, 1.0}, {1.0, 0.0}};
    return {build_wyner_ziv(half, pt, pu, z_of, L, dist, 0.0),
            wyner_ziv_corollary_bound(half, pt, pu, z_of, L, dist, 0.0)};
  }
  if (name == "mac") {
    // Y = (X1 xor N1, X2 xor N2).
    Matrix ch(4, std::vector<double>(4));
    for (std::size_t x1 = 0; x1 < 2; ++x1)
      for (std::size_t x2 = 0; x2 < 2; ++x2)
        for (std::size_t y = 0; y < 4; ++y)
          ch[x1 * 2 + x2][y] = bsc(x1, y / 2, p) * bsc(x2, y % 2, p);
    return {build_mac(half, half, ch, L, L), mac_corollary_bound(half, half, ch, L, L)};
  }
  if (name == "broadcast") {
    // X = (U1, U2) with independent uniform quaternary U1, U2; receiver 1
    // sees U1 and receiver 2 sees U2, each through a quaternary symmetric
    // channel. Binary versions of this instance have a bound of 1.
    const Matrix pu(4, std::vector<double>(4, 1.0 / 16.0));
    IndexMap x_of(4, std::vector<std::size_t>(4));
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) x_of[a][b] = a * 4 + b;
    const Matrix q4 = symmetric(4, p);
    Matrix ch(16, std::vector<double>(16));
    for (std::size_t x = 0; x < 16; ++x)
      for (std::size_t y1 = 0; y1 < 4; ++y1)
        for (std::size_t y2 = 0; y2 < 4; ++y2) ch[x][y1 * 4 + y2] = q4[x / 4][y1] * q4[x % 4][y2];
    return {build_broadcast(pu, x_of, ch, 4, L, L),
            broadcast_corollary_bound(pu, x_of, ch, 4, L, L)};
  }
  if (name == "relay") {
    // Quaternary X; the relay sees it through a quaternary symmetric channel,
    // describes the high bit of what it saw (flipped with probability p/2)
    // and forwards that bit. The destination sees X and the forwarded bit.
    const std::vector<double> px(4, 0.25);
    const Matrix pyr = symmetric(4, p);
    Matrix pu(4, std::vector<double>(2));
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t b = 0; b < 2; ++b) pu[r][b] = bsc(r / 2, b, p / 2.0);
    const IndexMap xr_of(4, std::vector<std::size_t>{0, 1});
    const Matrix q4 = symmetric(4, p);
    Matrix ch(32, std::vector<double>(8));
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t yr = 0; yr < 4; ++yr)
        for (std::size_t xr = 0; xr < 2; ++xr)
          for (std::size_t y = 0; y < 8; ++y)
            ch[(x * 4 + yr) * 2 + xr][y] = q4[x][y / 2] * bsc(xr, y % 2, p);
    return {build_relay(px, pyr, pu, xr_of, 2, ch, L),
            relay_corollary_bound(px, pyr, pu, xr_of, 2, ch, L)};
  }
  if (name == "cascade") {
    // Two noisy descriptions U, V of X plus a BSC view Y; the last node
    // outputs the majority of (Y, U, V).
    const Matrix py = symmetric(2, p);
    Matrix puv(2, std::vector<double>(4));
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t u = 0; u < 2; ++u)
        for (std::size_t v = 0; v < 2; ++v) puv[x][u * 2 + v] = bsc(x, u, p) * bsc(x, v, p);
    Matrix pz(8, std::vector<double>(2, 0.0));
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t u = 0; u < 2; ++u)
        for (std::size_t v = 0; v < 2; ++v) pz[(y * 2 + u) * 2 + v][(y + u + v) >= 2 ? 1 : 0] = 1.0;
    Matrix dist(4, std::vector<double>(2));
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t z = 0; z < 2; ++z) dist[x * 2 + y][z] = x == z ? 0.0 : 1.0;
    return {build_cascade(half, py, puv, 2, pz, L, L, L, dist, 0.0), nan};
  }
  throw std::invalid_argument("adn_preset: unknown preset " + name);
}

}  // namespace oneshot
