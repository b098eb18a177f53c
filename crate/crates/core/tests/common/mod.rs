/// Formulas exercising every constructor of the grammar.
pub const CORPUS: &[&str] = &[
    "TRUE",
    "FALSE",
    "0 = 0",
    "ord(x) >= 0",
    "ord(x) = INF",
    "ac(x) = 1",
    "ac(x) = 0 /\\ ord(x) = INF",
    "ord(x) >= 2 /\\ ac(x) = 1",
    "EX x:VF. ord(x) >= 2 /\\ ac(x) = 1",
    "ALL n:Z. n ≡_2 0 \\/ n ≡_2 1",
    "ALL y:RF. y * 0 = 0",
    "EX y:RF. y * y = 2",
    "~ord(x) >= 1",
    "~(ord(x) >= 1 /\\ ac(x) = 2)",
    "ord(x + y) >= ord(x)",
    "ord(x * y) = ord(x) + ord(y)",
    "ac(x * y) = ac(x) * ac(y)",
    "x = x",
    "x * y = y * x",
    "(x + 1) * x = 0",
    "x + (y + 1) = 0",
    "x * (y * x) = 1",
    "ord(x) + -3 >= 0",
    "ord(x) ≡_3 1",
    "ord(x) + ord(x) >= 1",
    "EX n:Z. ord(x) = n + n",
    "ALL x:VF. ord(x) >= 0 \\/ ~ord(x) >= 0",
    "EX x:VF. EX y:VF. x * y = 1 /\\ ord(x) = 1",
    "ALL x:VF. (EX y:VF. y * y = x) \\/ ~ord(x) ≡_2 0",
    "(EX x:VF. ord(x) = 0) /\\ (ALL n:Z. n >= n)",
    "ord(x) >= 0 /\\ (ord(y) >= 0 \\/ ac(y) = 3)",
    "(ord(x) >= 0 \\/ ord(y) >= 0) /\\ ac(y) = 3",
    "ord(x) >= 0 \\/ ord(y) >= 0 /\\ ac(y) = 3",
    "~~ord(x) >= 0",
    "~(EX y:RF. ac(x) = y + 1)",
    "EX r:RF. ALL s:RF. r * s = 0",
    "ALL n:Z. EX m:Z. m = n + 1",
    "ALL x:VF. ALL y:VF. ord(x * y) = ord(x) + ord(y)",
    "ord(y11) + ord(y11) >= 0 /\\ ord(y12) + ord(y12) >= -1 /\\ ord(y21) + ord(y21) >= 1",
    "INF >= ord(x)",
    "INF = INF",
    "n + 1 >= m",
    "n =_4= m + 2",
    "a + b = c /\\ ac(z) = a",
    "EX x:VF. x = 0",
    "ALL x:VF. x * 0 = 0",
    "ord(x) >= 0 /\\ ~(EX y:VF. ord(y) >= 0 /\\ y * y = x + 1)",
    "EX t:VF. (ord(t) = 1 /\\ ac(t) = 1) /\\ ALL u:VF. ~u * t = 1 \\/ ord(u) = -1",
    "ac(x + y) = ac(x) + ac(y) \\/ ord(x) = ord(y)",
    "-2 >= ord(x) + -5",
];
