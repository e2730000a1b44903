#include <map>
#include <string>

#include "darboux/error.hpp"
#include "darboux/examples/registry.hpp"

namespace darboux {

namespace {

const char* kExample1 = R"json({
  "name": "example1",
  "description": "u_xy = u_x u_y / (u - x)",
  "charts": {
    "M": {"coordinates": ["x", "y", "u", "u_x", "u_y", "u_xx", "u_yy"],
          "constraints": [{"kind": "nonzero", "expr": "u - x"}]},
    "M1": {"coordinates": ["y", "w", "w_y", "w_yy"]},
    "M2": {"coordinates": ["x", "v", "v_x", "v_xx", "v_xxx"],
           "constraints": [{"kind": "positive", "expr": "v_x"}]},
    "B1": {"coordinates": ["y", "c1"]},
    "B2": {"coordinates": ["x", "c2", "c3"]}
  },
  "systems": {
    "I": {"chart": "M", "forms": ["d(u) - u_x*d(x) - u_y*d(y)",
                                  "d(u_x) - u_xx*d(x) - u_x*u_y/(u - x)*d(y)",
                                  "d(u_y) - u_x*u_y/(u - x)*d(x) - u_yy*d(y)"]},
    "hat": {"chart": "M", "extends": "I", "forms": ["d(x)", "u_x*d(u_xx/u_x + 1/(u - x))"]},
    "check": {"chart": "M", "extends": "I", "forms": ["d(y)", "u_y*d(u_yy) - u_yy*d(u_y)"]},
    "K1": {"chart": "M1", "forms": ["d(w) - w_y*d(y)", "d(w_y) - w_yy*d(y)"]},
    "K2": {"chart": "M2", "forms": ["d(v) - v_x*d(x)", "d(v_x) - v_xx*d(x)", "d(v_xx) - v_xxx*d(x)"]}
  },
  "coframe": {"kind": "hyperbolic", "system": "I",
              "hat_omega": ["d(x)"], "hat_pi": ["u_x*d(u_xx/u_x + 1/(u - x))"],
              "check_omega": ["d(y)"], "check_pi": ["u_y*d(u_yy/u_y)"]},
  "intermediate_integrals": {"hat": ["x", "u_x/(u - x)", "u_xx/u_x + 1/(u - x)"],
                             "check": ["y", "u_yy/u_y"]},
  "quotient": {
    "M1": "M1", "M2": "M2", "K1": "K1", "K2": "K2",
    "G1": [["0", "w", "w_y", "w_yy"], ["0", "-1", "0", "0"]],
    "G2": [["0", "v", "v_x", "v_xx", "v_xxx"], ["0", "1", "0", "0", "0"]],
    "structure_constants": [[[0, 0], [0, -1]], [[0, 1], [0, 0]]],
    "q": ["x", "y", "x - (v + w)/v_x", "(v + w)*v_xx/v_x^2", "-w_y/v_x",
          "v_xx/v_x + (v + w)*v_xxx/v_x^2 - 2*(v + w)*v_xx^2/v_x^3", "-w_yy/v_x"],
    "factor_quotients": {
      "B1": "B1", "B2": "B2",
      "p1": ["y", "u_yy/u_y"],
      "p2": ["x", "u_x/(x - u)", "(u_xx - u_x/(x - u) + 2*u_x^2/(x - u))/(x - u)"],
      "q1": ["y", "w_yy/w_y"],
      "q2": ["x", "v_xx/v_x", "v_xxx/v_x"]
    }
  },
  "cauchy": {
    "parameters": ["x"],
    "ranges": [[-0.5, 0.5]],
    "data": ["x", "x", "f(x)", "g(x)", "f'(x) - g(x)",
             "g'(x) - g(x)*(f'(x) - g(x))/(f(x) - x)",
             "f''(x) - g'(x) - g(x)*(f'(x) - g(x))/(f(x) - x)"],
    "functions": {"f": {"params": ["x"], "body": "x + 1 + sin(x)/10"},
                  "g": {"params": ["x"], "body": "cos(x)"}},
    "fiber": ["v", "v_x"],
    "fiber_point": ["0", "1"],
    "fiber1": ["w", "w_y"],
    "fiber2": ["v", "v_x"],
    "route": "quotient",
    "grid": [21, 21],
    "pde": {"residual": "u_xy - u_x*u_y/(u - x)"},
    "oracle": {"kind": "graph", "variables": ["x", "y"],
               "components": {"u": "x + (f(y) - y)*exp(int(x, y, g(t)/(t - f(t)), t)) + exp(-int(0, x, g(t)/(t - f(t)), t))*int(x, y, exp(int(0, s, g(t)/(t - f(t)), t)), s)"}}
  },
  "integrator": {"method": "auto", "rtol": 1e-10, "atol": 1e-12, "padding": 0.05, "seed": 0, "fd_step": 0.001},
  "output": {"csv": "example1.csv", "report": "example1.json"}
})json";

const char* kExample2 = R"json({
  "name": "example2",
  "description": "3 u_xx u_yy^3 + 1 = 0",
  "charts": {
    "M": {"coordinates": ["x", "y", "u", "u_x", "u_y", "u_xy", "u_yy"],
          "constraints": [{"kind": "nonzero", "expr": "u_yy"}]},
    "M1": {"coordinates": ["t", "w", "v", "v_t", "v_tt"]},
    "M2": {"coordinates": ["s", "q", "p", "p_s", "p_ss"]},
    "B1": {"coordinates": ["t", "c1"]},
    "B2": {"coordinates": ["s", "c2"]}
  },
  "systems": {
    "I": {"chart": "M", "forms": ["d(u) - u_x*d(x) - u_y*d(y)",
                                  "d(u_x) + 1/(3*u_yy^3)*d(x) - u_xy*d(y)",
                                  "d(u_y) - u_xy*d(x) - u_yy*d(y)"]},
    "hat": {"chart": "M", "extends": "I", "forms": ["d(y) + 1/u_yy^2*d(x)", "d(u_xy - 1/u_yy)"]},
    "check": {"chart": "M", "extends": "I", "forms": ["d(y) - 1/u_yy^2*d(x)", "d(u_xy + 1/u_yy)"]},
    "K1": {"chart": "M1", "forms": ["d(w) - v_tt^2*d(t)", "d(v) - v_t*d(t)", "d(v_t) - v_tt*d(t)"]},
    "K2": {"chart": "M2", "forms": ["d(q) - p_ss^2*d(s)", "d(p) - p_s*d(s)", "d(p_s) - p_ss*d(s)"]}
  },
  "coframe": {"kind": "hyperbolic",
              "theta": ["d(u) - u_x*d(x) - u_y*d(y)",
                        "d(u_x) + 1/u_yy^2*d(u_y) + (1/(3*u_yy^3) - u_xy/u_yy^2)*d(x) - (u_xy + 1/u_yy)*d(y)",
                        "d(u_x) - 1/u_yy^2*d(u_y) + (1/(3*u_yy^3) + u_xy/u_yy^2)*d(x) + (1/u_yy - u_xy)*d(y)"],
              "hat_omega": ["d(y) + 1/u_yy^2*d(x)"], "hat_pi": ["d(u_xy - 1/u_yy)"],
              "check_omega": ["d(y) - 1/u_yy^2*d(x)"], "check_pi": ["d(u_xy + 1/u_yy)"]},
  "intermediate_integrals": {"hat": ["u_xy - 1/u_yy", "u_y + x*(1/u_yy - u_xy)"],
                             "check": ["u_xy + 1/u_yy", "u_y - x*(u_xy + 1/u_yy)"]},
  "quotient": {
    "M1": "M1", "M2": "M2", "K1": "K1", "K2": "K2",
    "G1": [["0", "1", "0", "0", "0"], ["0", "0", "1", "0", "0"], ["0", "0", "t", "1", "0"]],
    "G2": [["0", "-1", "0", "0", "0"], ["0", "0", "-1", "0", "0"], ["0", "0", "s", "1", "0"]],
    "structure_constants": [[[0, 0, 0], [0, 0, 0], [0, 0, 0]],
                            [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
                            [[0, 0, 0], [0, 0, 0], [0, 0, 0]]],
    "q": ["-2*(v_tt + p_ss)/(s + t)",
          "(v_tt - p_ss)*(t + s)/2 + p_s - v_t",
          "-q - w + 2*(t*v_t + s*p_s - p - v)/(s + t)*(v_tt + p_ss) + ((2*s - t)*v_tt^2 + (2*t - s)*p_ss^2 - 2*(s + t)*v_tt*p_ss)/3",
          "p + v - t*v_t - s*p_s + (s + t)*((2*t - s)*v_tt + (2*s - t)*p_ss)/6",
          "2*(s*v_tt - t*p_ss)/(s + t)",
          "(t - s)/2",
          "2/(s + t)"],
    "factor_quotients": {
      "B1": "B1", "B2": "B2",
      "p1": ["u_xy + 1/u_yy", "(u_y - x*(u_xy + 1/u_yy))/2"],
      "p2": ["1/u_yy - u_xy", "-(u_y + x*(1/u_yy - u_xy))/2"],
      "q1": ["t", "v_tt"],
      "q2": ["s", "p_ss"]
    }
  },
  "cauchy": {
    "parameters": ["eps"],
    "ranges": [[0, 0.4]],
    "t0": [0],
    "data": ["0", "eps", "f(eps)", "g(eps)", "f'(eps)", "g'(eps)", "f''(eps)"],
    "functions": {"f": {"params": ["x"], "body": "exp(x)"},
                  "g": {"params": ["x"], "body": "x"}},
    "fiber": ["w", "v", "v_t"],
    "fiber_point": ["0", "0", "0"],
    "parametrization": {
      "t": "1/f''(eps) + g'(eps)", "w": "w", "v": "v", "v_t": "v_t", "v_tt": "f'(eps)/2",
      "s": "1/f''(eps) - g'(eps)",
      "q": "f'(eps)^2/(2*f''(eps)) - w - f(eps)",
      "p": "g(eps) - f'(eps)/f''(eps)^2 + eps*(1/f''(eps) - g'(eps)) + 2*v_t/f''(eps) - v",
      "p_s": "v_t + eps - f'(eps)/f''(eps)",
      "p_ss": "-f'(eps)/2"
    },
    "fiber1": ["w", "v", "v_t"],
    "fiber2": ["q", "p", "p_s"],
    "route": "quotient",
    "grid": [15, 15],
    "pde": {"residual": "3*u_xx*u_yy^3 + 1"},
    "oracle": {"kind": "parametric", "variables": ["eps", "delta"],
               "components": {
                 "x": "(f'(delta) - f'(eps))/(1/f''(delta) - g'(delta) + 1/f''(eps) + g'(eps))",
                 "y": "delta + f'(eps)*(1/f''(eps) + g'(eps) + 1/f''(delta) - g'(delta))/4 + f'(delta)*(1/f''(eps) + g'(eps) - 1/f''(delta) + g'(delta))/4 - f'(delta)*(1/f''(delta) + g'(delta))/2 + int(eps, delta, f'(r)*(g''(r) - f'''(r)/f''(r)^2), r)/2",
                 "u": "f(delta) - f'(delta)^2/(2*f''(delta)) + int(eps, delta, f'(r)^2*(g''(r) - f'''(r)/f''(r)^2), r)/4 + (f'(eps) - f'(delta))/(1/f''(eps) + g'(eps) + 1/f''(delta) - g'(delta))*(f'(delta)*g'(delta)/f''(delta) - g(delta) - int(eps, delta, f'(r)*(g''(r) - f'''(r)/f''(r)^2)*(1/f''(r) + g'(r)), r)/2) + (1/f''(delta) - g'(delta))*(2*f'(eps)*f'(delta) + 2*f'(eps)^2 - f'(delta)^2)/12 + (1/f''(eps) + g'(eps))*(2*f'(delta)^2 - f'(eps)^2 + 2*f'(eps)*f'(delta))/12"
               }}
  },
  "integrator": {"method": "auto", "rtol": 1e-10, "atol": 1e-12, "padding": 0.05, "seed": 0, "fd_step": 0.001},
  "output": {"csv": "example2.csv", "report": "example2.json"}
})json";

const char* kExample3 = R"json({
  "name": "example3",
  "description": "u_xz = 0, u_yz = 0",
  "charts": {
    "M": {"coordinates": ["x", "y", "z", "u", "u_x", "u_y", "u_z", "u_xx", "u_xy", "u_yy", "u_zz"]},
    "M1": {"coordinates": ["z", "w", "w_z", "w_zz"]},
    "M2": {"coordinates": ["x", "y", "v", "v_x", "v_y", "v_xx", "v_xy", "v_yy"]},
    "B1": {"coordinates": ["z", "c1", "c2"]},
    "B2": {"coordinates": ["x", "y", "c3", "c4", "c5", "c6", "c7"]}
  },
  "systems": {
    "I": {"chart": "M", "forms": ["d(u) - u_x*d(x) - u_y*d(y) - u_z*d(z)",
                                  "d(u_x) - u_xx*d(x) - u_xy*d(y)",
                                  "d(u_y) - u_xy*d(x) - u_yy*d(y)",
                                  "d(u_z) - u_zz*d(z)"]},
    "hat": {"chart": "M", "extends": "I", "forms": ["d(x)", "d(y)", "d(u_xx)", "d(u_xy)", "d(u_yy)"]},
    "check": {"chart": "M", "extends": "I", "forms": ["d(z)", "d(u_zz)"]},
    "K1": {"chart": "M1", "forms": ["d(w) - w_z*d(z)", "d(w_z) - w_zz*d(z)"]},
    "K2": {"chart": "M2", "forms": ["d(v) - v_x*d(x) - v_y*d(y)", "d(v_x) - v_xx*d(x) - v_xy*d(y)",
                                    "d(v_y) - v_xy*d(x) - v_yy*d(y)"]}
  },
  "coframe": {"kind": "decomposable", "system": "I",
              "hat_omega": ["d(x)", "d(y)"], "hat_pi": ["d(u_xx)", "d(u_xy)", "d(u_yy)"],
              "check_omega": ["d(z)"], "check_pi": ["d(u_zz)"]},
  "intermediate_integrals": {"hat": ["x", "y", "u_x", "u_y", "u_xx", "u_xy", "u_yy"],
                             "check": ["z", "u_z", "u_zz"]},
  "quotient": {
    "M1": "M1", "M2": "M2", "K1": "K1", "K2": "K2",
    "G1": [["0", "1", "0", "0"]],
    "G2": [["0", "0", "-1", "0", "0", "0", "0", "0"]],
    "structure_constants": [[[0]]],
    "q": ["x", "y", "z", "w + v", "v_x", "v_y", "w_z", "v_xx", "v_xy", "v_yy", "w_zz"],
    "factor_quotients": {
      "B1": "B1", "B2": "B2",
      "p1": ["z", "u_z", "u_zz"],
      "p2": ["x", "y", "u_x", "u_y", "u_xx", "u_xy", "u_yy"],
      "q1": ["z", "w_z", "w_zz"],
      "q2": ["x", "y", "v_x", "v_y", "v_xx", "v_xy", "v_yy"]
    }
  },
  "cauchy": {
    "parameters": ["x", "y"],
    "ranges": [[-0.5, 0.5], [-0.5, 0.5]],
    "data": ["x", "y", "x + y", "a(x, y)", "a'[1,0](x, y) - k(x + y)", "a'[0,1](x, y) - k(x + y)", "k(x + y)",
             "a'[2,0](x, y) - k'(x + y)", "a'[1,1](x, y) - k'(x + y)", "a'[0,2](x, y) - k'(x + y)", "k'(x + y)"],
    "functions": {"a": {"params": ["x", "y"], "body": "x*y"},
                  "k": {"params": ["x"], "body": "1"}},
    "fiber": ["v"],
    "fiber_point": ["a(0, 0)"],
    "n1": 2,
    "n2": 1,
    "route": "decomposable",
    "grid": [9, 9],
    "oracle": {"kind": "graph", "variables": ["x", "y", "z"],
               "components": {"u": "a(x, y) + int(x + y, z, k(s), s)"}}
  },
  "integrator": {"method": "auto", "rtol": 1e-10, "atol": 1e-12, "padding": 0.05, "seed": 0, "fd_step": 0.001},
  "output": {"csv": "example3.csv", "report": "example3.json"}
})json";

const char* kLiouville = R"json({
  "name": "liouville",
  "description": "u_xy = exp(u)",
  "charts": {
    "M": {"coordinates": ["x", "y", "u", "u_x", "u_y", "u_xx", "u_yy"]},
    "M1": {"coordinates": ["y", "w", "w_y", "w_yy", "w_yyy"],
           "constraints": [{"kind": "positive", "expr": "w_y"}],
           "ranges": {"w": [0.5, 2], "w_y": [0.5, 2]}},
    "M2": {"coordinates": ["x", "v", "v_x", "v_xx", "v_xxx"],
           "constraints": [{"kind": "positive", "expr": "v_x"}],
           "ranges": {"v": [0.5, 2], "v_x": [0.5, 2]}},
    "B1": {"coordinates": ["y", "c1"]},
    "B2": {"coordinates": ["x", "c2"]}
  },
  "systems": {
    "I": {"chart": "M", "forms": ["d(u) - u_x*d(x) - u_y*d(y)",
                                  "d(u_x) - u_xx*d(x) - exp(u)*d(y)",
                                  "d(u_y) - exp(u)*d(x) - u_yy*d(y)"]},
    "hat": {"chart": "M", "extends": "I", "forms": ["d(x)", "d(u_xx - u_x^2/2)"]},
    "check": {"chart": "M", "extends": "I", "forms": ["d(y)", "d(u_yy - u_y^2/2)"]},
    "K1": {"chart": "M1", "forms": ["d(w) - w_y*d(y)", "d(w_y) - w_yy*d(y)", "d(w_yy) - w_yyy*d(y)"]},
    "K2": {"chart": "M2", "forms": ["d(v) - v_x*d(x)", "d(v_x) - v_xx*d(x)", "d(v_xx) - v_xxx*d(x)"]}
  },
  "coframe": {"kind": "hyperbolic", "system": "I",
              "hat_omega": ["d(x)"], "hat_pi": ["d(u_xx - u_x^2/2)"],
              "check_omega": ["d(y)"], "check_pi": ["d(u_yy - u_y^2/2)"]},
  "intermediate_integrals": {"hat": ["x", "u_xx - u_x^2/2"], "check": ["y", "u_yy - u_y^2/2"]},
  "quotient": {
    "M1": "M1", "M2": "M2", "K1": "K1", "K2": "K2",
    "G1": [["0", "1", "0", "0", "0"],
           ["0", "w", "w_y", "w_yy", "w_yyy"],
           ["0", "w^2", "2*w*w_y", "2*w_y^2 + 2*w*w_yy", "6*w_y*w_yy + 2*w*w_yyy"]],
    "G2": [["0", "-1", "0", "0", "0"],
           ["0", "v", "v_x", "v_xx", "v_xxx"],
           ["0", "-v^2", "-2*v*v_x", "-2*v_x^2 - 2*v*v_xx", "-6*v_x*v_xx - 2*v*v_xxx"]],
    "structure_constants": [[[0, 0, 0], [1, 0, 0], [0, 2, 0]],
                            [[-1, 0, 0], [0, 0, 0], [0, 0, 1]],
                            [[0, -2, 0], [0, 0, -1], [0, 0, 0]]],
    "q": ["x", "y", "log(2*w_y*v_x/(v + w)^2)",
          "v_xx/v_x - 2*v_x/(v + w)",
          "w_yy/w_y - 2*w_y/(v + w)",
          "v_xxx/v_x - v_xx^2/v_x^2 - 2*v_xx/(v + w) + 2*v_x^2/(v + w)^2",
          "w_yyy/w_y - w_yy^2/w_y^2 - 2*w_yy/(v + w) + 2*w_y^2/(v + w)^2"],
    "factor_quotients": {
      "B1": "B1", "B2": "B2",
      "p1": ["y", "u_yy - u_y^2/2"],
      "p2": ["x", "u_xx - u_x^2/2"],
      "q1": ["y", "w_yyy/w_y - 3*w_yy^2/(2*w_y^2)"],
      "q2": ["x", "v_xxx/v_x - 3*v_xx^2/(2*v_x^2)"]
    }
  },
  "cauchy": {
    "parameters": ["x"],
    "ranges": [[0, 0.8]],
    "data": ["x", "x", "f(x)", "g(x)", "f'(x) - g(x)", "g'(x) - exp(f(x))", "f''(x) - g'(x) - exp(f(x))"],
    "functions": {"f": {"params": ["x"], "body": "x^2"},
                  "g": {"params": ["x"], "body": "0"}},
    "fiber": ["v", "w", "v_x"],
    "fiber_point": ["1", "1", "1"],
    "fiber1": ["w", "w_y", "w_yy"],
    "fiber2": ["v", "v_x", "v_xx"],
    "route": "second-method",
    "grid": [21, 21],
    "pde": {"residual": "u_xy - exp(u)"}
  },
  "integrator": {"method": "auto", "rtol": 1e-12, "atol": 1e-13, "padding": 0.05, "seed": 0, "fd_step": 0.001},
  "output": {"csv": "liouville.csv", "report": "liouville.json"}
})json";

const char* kWave = R"json({
  "name": "wave",
  "description": "u_xy = 0 (wave equation in null coordinates)",
  "charts": {
    "M": {"coordinates": ["x", "y", "u", "u_x", "u_y", "u_xx", "u_yy"]},
    "M1": {"coordinates": ["y", "w", "w_y", "w_yy"]},
    "M2": {"coordinates": ["x", "v", "v_x", "v_xx"]},
    "B1": {"coordinates": ["y", "c1", "c2"]},
    "B2": {"coordinates": ["x", "c3", "c4"]}
  },
  "systems": {
    "I": {"chart": "M", "forms": ["d(u) - u_x*d(x) - u_y*d(y)", "d(u_x) - u_xx*d(x)", "d(u_y) - u_yy*d(y)"]},
    "hat": {"chart": "M", "extends": "I", "forms": ["d(x)", "d(u_xx)"]},
    "check": {"chart": "M", "extends": "I", "forms": ["d(y)", "d(u_yy)"]},
    "K1": {"chart": "M1", "forms": ["d(w) - w_y*d(y)", "d(w_y) - w_yy*d(y)"]},
    "K2": {"chart": "M2", "forms": ["d(v) - v_x*d(x)", "d(v_x) - v_xx*d(x)"]}
  },
  "coframe": {"kind": "hyperbolic", "system": "I",
              "hat_omega": ["d(x)"], "hat_pi": ["d(u_xx)"],
              "check_omega": ["d(y)"], "check_pi": ["d(u_yy)"]},
  "intermediate_integrals": {"hat": ["x", "u_x", "u_xx"], "check": ["y", "u_y", "u_yy"]},
  "quotient": {
    "M1": "M1", "M2": "M2", "K1": "K1", "K2": "K2",
    "G1": [["0", "1", "0", "0"]],
    "G2": [["0", "-1", "0", "0"]],
    "structure_constants": [[[0]]],
    "q": ["x", "y", "v + w", "v_x", "w_y", "v_xx", "w_yy"],
    "factor_quotients": {
      "B1": "B1", "B2": "B2",
      "p1": ["y", "u_y", "u_yy"],
      "p2": ["x", "u_x", "u_xx"],
      "q1": ["y", "w_y", "w_yy"],
      "q2": ["x", "v_x", "v_xx"]
    }
  },
  "cauchy": {
    "parameters": ["x"],
    "ranges": [[-1, 1]],
    "data": ["x", "x", "a(x)", "(a'(x) + b(x))/2", "(a'(x) - b(x))/2", "(a''(x) + b'(x))/2", "(a''(x) - b'(x))/2"],
    "functions": {"a": {"params": ["x"], "body": "sin(x)"},
                  "b": {"params": ["x"], "body": "0"}},
    "fiber": ["v"],
    "fiber_point": ["0"],
    "fiber1": ["w"],
    "fiber2": ["v"],
    "route": "quotient",
    "grid": [21, 21],
    "pde": {"residual": "u_xy"},
    "oracle": {"kind": "graph", "variables": ["x", "y"],
               "components": {"u": "(a(x) + a(y))/2 + int(y, x, b(s), s)/2"}}
  },
  "integrator": {"method": "auto", "rtol": 1e-10, "atol": 1e-12, "padding": 0.05, "seed": 0, "fd_step": 0.001},
  "output": {"csv": "wave.csv", "report": "wave.json"}
})json";

const std::map<std::string, const char*>& documents() {
  static const std::map<std::string, const char*> docs = {
      {"example1", kExample1}, {"example2", kExample2}, {"example3", kExample3},
      {"liouville", kLiouville}, {"wave", kWave}};
  return docs;
}

}  // namespace

std::vector<std::string> example_names() {
  std::vector<std::string> out;
  for (const auto& [name, doc] : documents()) out.push_back(name);
  return out;
}

nlohmann::json example_document(const std::string& name) {
  auto it = documents().find(name);
  if (it == documents().end()) throw InputError("unknown example '" + name + "'");
  return nlohmann::json::parse(it->second);
}

}  // namespace darboux
