//! Closed-form reference invariants of the normal forms, written with
//! `J_x2` for partials.

pub const CASE1_T213: &str = "J_x2 - (1/2)*(J_x1x3 + x3*J_x2x3 + J*J_x3x3) + (1/4)*J_x3^2";

pub const CASE2: [(&str, &str); 3] = [
    ("T2_12", "(x2*J_x3 - 3*x3)/(2*x2)"),
    ("T2_13", "(3*x3^2 - 6*x2*J + 4*x2^2*J_x2 + 2*x2*x3*J_x3 - 2*x2^3*J_x1x3 - 2*x2^2*x3*J_x2x3 + x2^2*J_x3^2 - 2*x2^2*J*J_x3x3)/(4*x2^2)"),
    ("T2_23", "(1 - x2*J_x3x3)/2"),
];

/// Case 3 auxiliary function `C` in its reference form.
pub const CASE3_C: &str = "(sqrt(-e*H_x1)/(2*H_x1))*((H_x1*H_x3 - H*H_x1x3 - H_x1x2)*J - (1+x3*J)*H_x1x1 - (J_x2 + x3*J_x1 + H*J_x3)*H_x1)";

pub const CASE3_T212: &str = "(J_x2 + x3*J_x1 + H*J_x3 + J*H_x3)/2";

pub const CASE3_T213: &str = "e*C^2*H_x1 - H_x1*J_x3 + J^2*H_x1 + (1/(2*sqrt(-e*H_x1)))*(2*C*(H_x1*J_x2 + J*H_x1x2 + H_x1x1 + 2*x3*H_x1*J_x1 + x3*J*H_x1x1 + 2*H*H_x1*J_x3 + H*H_x1x3*J - 2*H_x1*H_x3*J) - 2*x3*C_x1*H_x1*J - 2*C_x1*H_x1 - 2*C_x3*H*H_x1*J - 2*C_x2*H_x1*J)";

pub const CASE3_T323: &str = "(e/(2*H_x1*sqrt(-e*H_x1)))*(x3*H_x1x1 - 2*H_x1*H_x3 + H_x1x2 + H*H_x1x3)";

pub const CASE3_T223: &str = "-(C_x2 + x3*C_x1 + H*C_x3 + C*H_x3) - (e/(2*sqrt(-e*H_x1)))*(H_x1x3 + 2*J*H_x1)";
