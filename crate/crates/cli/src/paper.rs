use std::fmt::Write as _;

use clap::{Args, ValueEnum};
use mdtds::bank::{Bank, BankPeriodicity};
use mdtds::cesaro::{cesaro_scan, sign_ball_sum, sign_cesaro, sign_cesaro_limit};
use mdtds::circle::{Circle, CircleSet};
use mdtds::engine::{Action, Mdtds};
use mdtds::family::Family;
use mdtds::scalar::{ratio, Rational, Scalar};
use mdtds::subgroup::SubgroupSpec;
use mdtds::word::{Gen, Word};
use mdtds::DEFAULT_NODE_CAP;
use num_traits::{Signed, ToPrimitive};

use crate::model::parse_list;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Item {
    All,
    #[value(name = "ex3.9")]
    Ex39,
    #[value(name = "ex4.4")]
    Ex44,
    #[value(name = "prop5.1")]
    Prop51,
    #[value(name = "prop5.2")]
    Prop52,
    #[value(name = "prop5.3")]
    Prop53,
    #[value(name = "prop5.4")]
    Prop54,
    #[value(name = "thm6.1")]
    Thm61,
    #[value(name = "thm6.2")]
    Thm62,
    #[value(name = "thm6.3")]
    Thm63,
}

#[derive(Args, Debug)]
pub struct PaperArgs {
    #[arg(long, value_enum, default_value = "all")]
    item: Item,
    /// ex3.9: the degree q = 2|S|; prop5.*: bank rates (default 2,3).
    #[arg(long)]
    q: Option<String>,
    /// thm6.*: circle angles (default 1/2,1/3).
    #[arg(long)]
    theta: Option<String>,
    /// Largest radius for ex3.9 (default 12) and prop5.4 (default 5).
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    cap: u64,
}

struct Sheet {
    item: String,
    out: String,
}

impl Sheet {
    fn new(item: String) -> Self {
        Sheet { item, out: String::new() }
    }

    fn check(&mut self, ok: bool, claim: impl AsRef<str>) -> bool {
        let verdict = if ok { "PASS" } else { "FAIL" };
        writeln!(self.out, "{verdict} {} {}", self.item, claim.as_ref()).unwrap();
        ok
    }

    fn info(&mut self, text: impl AsRef<str>) {
        writeln!(self.out, "INFO {} {}", self.item, text.as_ref()).unwrap();
    }

    fn line(&mut self, text: impl AsRef<str>) {
        writeln!(self.out, "    {}", text.as_ref()).unwrap();
    }
}

fn w(text: &str, rank: usize) -> Word {
    Word::parse(text, rank).expect("built-in word")
}

fn spec(text: &str, rank: usize) -> SubgroupSpec {
    SubgroupSpec::parse(text, rank).expect("built-in subgroup")
}

fn dec(x: &Rational) -> String {
    format!("{:.6}", x.to_f64().unwrap_or(f64::NAN))
}

fn set_text(xs: &[Rational]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_text()).collect();
    format!("{{{}}}", items.join(", "))
}

fn bank_rates(args: &PaperArgs) -> Result<Bank<Rational>, CliError> {
    let rates = parse_list::<Rational>(args.q.as_deref().unwrap_or("2,3"))?;
    Ok(Bank::new(rates)?)
}

fn circle_angles(args: &PaperArgs) -> Result<Circle<Rational>, CliError> {
    let angles = parse_list::<Rational>(args.theta.as_deref().unwrap_or("1/2,1/3"))?;
    Ok(Circle::new(angles)?)
}

fn ex39(args: &PaperArgs, s: &mut Sheet) -> Result<(), CliError> {
    let q: u32 = match args.q.as_deref() {
        None => 4,
        Some(t) => t.trim().parse().map_err(|_| CliError::usage(format!("ex3.9 needs an integer --q, got {t:?}")))?,
    };
    if q < 4 || q % 2 == 1 {
        return Err(CliError::usage("ex3.9 needs an even --q of at least 4"));
    }
    let nmax = args.nmax.unwrap_or(12);
    let rank = (q / 2) as usize;
    let sys = Mdtds::new(Family::<Rational>::sign(rank)).with_node_cap(args.cap);
    let report = cesaro_scan(&sys, &ratio(1, 1), nmax)?;
    s.line("n, |V_n|, brute sum, closed form, C_n");
    let mut exact = true;
    for r in &report.rows {
        let closed = sign_ball_sum(r.n, q);
        exact &= r.ball_sum == Rational::from_integer(closed.clone());
        s.line(format!("{}, {}, {}, {}, {}", r.n, r.ball_size, r.ball_sum, closed, dec(&r.mean)));
    }
    s.check(exact, format!("brute Σ (-1)^|t| over V_n equals (-1)^n (q-1)^n for n ≤ {nmax}"));
    let limit = sign_cesaro_limit(q);
    let tol = ratio(1, 100_000);
    let top = nmax.max(13);
    let parity_ok = (12..=top).all(|n| {
        let target = if n % 2 == 0 { limit.clone() } else { -limit.clone() };
        (sign_cesaro(n, q) - target).abs() < tol
    });
    s.check(parity_ok, format!("C_n within 1e-5 of ±{} for 12 ≤ n ≤ {top}", limit));
    let gap_floor = ratio(9, 10);
    let gaps_ok = (6..top).all(|n| (sign_cesaro(n, q) - sign_cesaro(n + 1, q)).abs() > gap_floor);
    s.check(gaps_ok, format!("|C_n - C_(n+1)| > 0.9 for 6 ≤ n < {top}, so C_n has no limit"));
    Ok(())
}

fn ex44(s: &mut Sheet) -> Result<(), CliError> {
    let right = Mdtds::new(Family::<Rational>::quarter_square());
    let left = right.clone().with_action(Action::Left);
    let h = spec("cyclic:s1*s2", 2);
    let roots = [ratio(1, 3), ratio(1, 1)];
    let candidates = [ratio(0, 1), ratio(1, 9), ratio(1, 3), ratio(1, 2), ratio(1, 1)];
    let common: Vec<Rational> = candidates.iter().filter(|x| right.is_fixed(x).unwrap_or(false)).cloned().collect();
    s.check(common == [ratio(1, 1)], format!("Fix(f1) ∩ Fix(f2) among {} is {}", set_text(&candidates), set_text(&common)));
    let f1f2 = |x: &Rational| ratio(3, 4) * x.clone() * x.clone() + ratio(1, 4);
    s.check(roots.iter().all(|x| f1f2(x) == *x), "1/3 and 1 solve f1(f2(x)) = x");

    let t = w("s1^2", 2);
    let r = w("s1 s2", 2);
    let third = ratio(1, 3);
    let mut consistent = false;
    for (name, sys) in [("right (D_t1t2 = D_t2 ∘ D_t1)", &right), ("left (D_t1t2 = D_t1 ∘ D_t2)", &left)] {
        let fixed: Vec<Rational> = roots
            .iter()
            .filter(|x| sys.is_h_fixed(&h, x, 6).map(|v| v.is_verified()).unwrap_or(false))
            .cloned()
            .collect();
        let periodic: Vec<Rational> = roots
            .iter()
            .filter(|x| sys.is_h_periodic(&h, x, 4, 4).map(|v| v.is_verified()).unwrap_or(false))
            .cloned()
            .collect();
        let dt = sys.evaluate(&t, &third)?;
        let drt = sys.evaluate(&r.mul(&t), &third)?;
        s.info(format!(
            "{name}: Fix(D^H) ∩ roots = {}, Per_H ∩ roots = {}, D_(s1^2)(1/3) = {dt}, D_(s1 s2 s1^2)(1/3) = {drt}",
            set_text(&fixed),
            set_text(&periodic)
        ));
        consistent |= fixed == roots && periodic == [ratio(1, 1)] && dt == ratio(5, 8) && drt == ratio(37, 64);
    }
    s.check(
        consistent,
        "one letter order gives Fix(D^H) = {1/3, 1}, Per_H = {1} and the pair (s1^2, s1 s2) with 5/8 vs 37/64",
    );
    Ok(())
}

fn prop51(args: &PaperArgs, s: &mut Sheet) -> Result<(), CliError> {
    let bank = bank_rates(args)?;
    let rank = bank.rates().len();
    let sys = Mdtds::new(&bank);
    let xs = [ratio(1, 1), ratio(7, 3), ratio(1, 10)];
    let mut texts = vec!["bal:", "even:1,2", "cyclic:s1*s2*s1^-1*s2^-1"];
    if rank == 2 {
        texts.push("cyclic:s1*s2^-1");
    }
    for text in texts {
        let h = SubgroupSpec::parse(text, rank)?;
        let verdict = bank.classify_periodicity(&h, 3, args.cap)?;
        match &verdict {
            BankPeriodicity::Empty { witness } => {
                let moved = xs.iter().all(|x| sys.evaluate(witness, x).map(|v| v != *x).unwrap_or(false));
                s.check(moved, format!("{h}: witness {witness} has multiplier {} and moves every sampled x", bank.word_multiplier(witness)?));
            }
            BankPeriodicity::AllPositiveReals => {
                let ok = xs
                    .iter()
                    .all(|x| sys.is_h_periodic(&h, x, 3, 3).map(|v| v.is_verified()).unwrap_or(false));
                s.check(ok, format!("{h}: Per_H = (0, ∞), confirmed on V_3 × (H ∩ V_3) at sampled x"));
            }
            BankPeriodicity::UndecidedUpTo { depth } => s.info(format!("{h}: every multiplier on H ∩ V_{depth} is 1")),
        }
    }
    Ok(())
}

fn prop52(args: &PaperArgs, s: &mut Sheet) -> Result<(), CliError> {
    let bank = bank_rates(args)?;
    let rank = bank.rates().len();
    for text in ["cyclic:s1", "full", "even:1"] {
        let h = SubgroupSpec::parse(text, rank)?;
        let verdict = bank.classify_periodicity(&h, 3, args.cap)?;
        let ok = matches!(&verdict, BankPeriodicity::Empty { witness } if witness.len() == 1 && h.member(witness));
        s.check(ok, format!("{h} contains a generator, so Per_H is {verdict}"));
    }
    Ok(())
}

fn prop53(args: &PaperArgs, s: &mut Sheet) -> Result<(), CliError> {
    let bank = bank_rates(args)?;
    let rank = bank.rates().len();
    let balanced = SubgroupSpec::BalancedAll.ball(5, rank, args.cap)?;
    let mut all_one = true;
    for y in &balanced {
        all_one &= bank.word_multiplier(y)? == ratio(1, 1);
    }
    s.check(all_one, format!("all {} words of H^(=) ∩ V_5 have multiplier 1", balanced.len()));
    for text in ["bal:", "cyclic:s1*s2*s1^-1*s2^-1"] {
        let h = SubgroupSpec::parse(text, rank)?;
        let verdict = bank.classify_periodicity(&h, 5, args.cap)?;
        s.check(verdict == BankPeriodicity::AllPositiveReals, format!("{h} ⊂ H^(=) gives Per_H = (0, ∞)"));
    }
    Ok(())
}

fn prop54(args: &PaperArgs, s: &mut Sheet) -> Result<(), CliError> {
    let bank = bank_rates(args)?;
    let nmax = args.nmax.unwrap_or(5);
    let x = ratio(1, 1);
    match bank.cesaro_limit() {
        Ok(t) => {
            let product = bank.rates().iter().fold(ratio(1, 1), |acc, q| acc * q.clone());
            let q = 2 * bank.rates().len() as i64 - 1;
            s.info(format!("closed-form limit of C_n: {t} (Q = {product}, q - 1 = {q})"));
        }
        Err(e) => s.info(format!("no trichotomy: {e}")),
    }
    let box_ok = (0..=nmax).all(|n| bank.ball_sum_paper(&x, n) == bank.box_sum(&x, n));
    s.check(box_ok, format!("closed form equals the exponent-box sum for n ≤ {nmax}"));
    s.line("n, closed form, free-group ball sum, closed/brute, brute C_n");
    let mut first_mismatch = None;
    for n in 0..=nmax {
        let paper = bank.ball_sum_paper(&x, n);
        let brute = bank.ball_sum_brute(&x, n, args.cap)?;
        let size = Rational::from_integer(mdtds::ball_size(n, bank.rates().len()).into());
        if paper != brute && first_mismatch.is_none() {
            first_mismatch = Some((n, paper.clone(), brute.clone()));
        }
        s.line(format!(
            "{n}, {paper}, {brute}, {}, {}",
            dec(&(paper.clone() / brute.clone())),
            dec(&(brute.clone() / size))
        ));
    }
    match first_mismatch {
        Some((n, paper, brute)) => s.check(
            false,
            format!("closed form equals Σ over the free-group ball V_n: mismatch at n = {n} ({paper} vs {brute})"),
        ),
        None => s.check(true, format!("closed form equals Σ over the free-group ball V_n for n ≤ {nmax}")),
    };
    Ok(())
}

fn thm61(s: &mut Sheet) -> Result<(), CliError> {
    for (angles, expect_full) in [("1,2", true), ("1/2,1", false), ("2,3,5", true)] {
        let c = Circle::new(parse_list::<Rational>(angles)?)?;
        let set = c.fixed_set();
        let sys = Mdtds::new(&c);
        let xs: Vec<Rational> = (0..10).map(|k| ratio(k, 10)).collect();
        let mut residual_zero = true;
        for x in &xs {
            residual_zero &= sys.fixed_point_residual(x)? == ratio(0, 1);
        }
        let ok = (set == CircleSet::FullCircle) == expect_full && residual_zero == expect_full;
        s.check(ok, format!("θ = ({angles}): Fix = {set}, zero residual at 10 sampled x: {residual_zero}"));
    }
    Ok(())
}

fn circle_agrees(sys: &Mdtds<&Circle<Rational>>, h: &SubgroupSpec, set: &CircleSet) -> Result<bool, CliError> {
    let mut ok = true;
    for k in 0..10 {
        let x = ratio(k, 10);
        let periodic = sys.is_h_periodic(h, &x, 4, 4)?.is_verified();
        let fixed = sys.is_h_fixed(h, &x, 4)?.is_verified();
        ok &= periodic == fixed;
        match set {
            CircleSet::FullCircle => ok &= periodic,
            CircleSet::Empty { .. } => ok &= !periodic,
            CircleSet::UndecidedUpTo { .. } => {}
        }
    }
    Ok(ok)
}

fn thm62(args: &PaperArgs, s: &mut Sheet) -> Result<(), CliError> {
    let c = circle_angles(args)?;
    let rank = c.angles().len();
    let sys = Mdtds::new(&c);
    let mut texts = vec!["cyclic:s1^2".to_string(), "cyclic:s1".to_string(), "bal:".to_string(), "even:1,2".to_string()];
    if rank >= 2 {
        texts.push("cyclic:s2^3".to_string());
    }
    for text in texts {
        let h = SubgroupSpec::parse(&text, rank)?;
        let set = c.periodic_set(&h, 4, args.cap)?;
        let agree = circle_agrees(&sys, &h, &set)?;
        s.check(agree, format!("{h}: Per_H = {set}; bounded fixed and periodic verdicts agree at 10 sampled x"));
    }
    Ok(())
}

fn thm63(args: &PaperArgs, s: &mut Sheet) -> Result<(), CliError> {
    let c = circle_angles(args)?;
    let sys = Mdtds::new(&c);
    for gen in Gen::all(c.angles().len()) {
        let h = c.rational_period_subgroup(gen)?;
        let set = c.periodic_set(&h, 4, args.cap)?;
        let agree = circle_agrees(&sys, &h, &set)?;
        s.check(
            set == CircleSet::FullCircle && agree,
            format!("θ_{} = {} gives H = {h}, Per_H = {set}", gen.index(), c.angles()[gen.slot()]),
        );
    }
    Ok(())
}

pub fn run(args: &PaperArgs) -> Result<String, CliError> {
    let items: Vec<Item> = match args.item {
        Item::All => Item::value_variants().iter().copied().filter(|i| *i != Item::All).collect(),
        one => vec![one],
    };
    let mut out = String::new();
    for item in items {
        let name = item.to_possible_value().expect("named item").get_name().to_string();
        let mut sheet = Sheet::new(name);
        match item {
            Item::Ex39 => ex39(args, &mut sheet)?,
            Item::Ex44 => ex44(&mut sheet)?,
            Item::Prop51 => prop51(args, &mut sheet)?,
            Item::Prop52 => prop52(args, &mut sheet)?,
            Item::Prop53 => prop53(args, &mut sheet)?,
            Item::Prop54 => prop54(args, &mut sheet)?,
            Item::Thm61 => thm61(&mut sheet)?,
            Item::Thm62 => thm62(args, &mut sheet)?,
            Item::Thm63 => thm63(args, &mut sheet)?,
            Item::All => unreachable!(),
        }
        out.push_str(&sheet.out);
    }
    Ok(out)
}
