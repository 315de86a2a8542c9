//! Worker classes and small containers indexed by them.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Skill {
    High,
    Low,
}

impl Skill {
    pub const ALL: [Skill; 2] = [Skill::High, Skill::Low];

    pub fn tag(self) -> &'static str {
        match self {
            Skill::High => "h",
            Skill::Low => "l",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    Native,
    NonNative,
}

impl Origin {
    pub fn tag(self) -> &'static str {
        match self {
            Origin::Native => "N",
            Origin::NonNative => "I",
        }
    }
}

/// One of the four worker types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorkerClass {
    pub skill: Skill,
    pub origin: Origin,
}

impl WorkerClass {
    pub const H_N: WorkerClass = WorkerClass::new(Skill::High, Origin::Native);
    pub const L_N: WorkerClass = WorkerClass::new(Skill::Low, Origin::Native);
    pub const H_I: WorkerClass = WorkerClass::new(Skill::High, Origin::NonNative);
    pub const L_I: WorkerClass = WorkerClass::new(Skill::Low, Origin::NonNative);

    /// Canonical ordering used by every vector in the crate.
    pub const ALL: [WorkerClass; 4] = [Self::H_N, Self::L_N, Self::H_I, Self::L_I];

    pub const fn new(skill: Skill, origin: Origin) -> Self {
        WorkerClass { skill, origin }
    }

    /// `"h_N"`, `"l_I"`, ...
    pub fn tag(self) -> &'static str {
        match (self.skill, self.origin) {
            (Skill::High, Origin::Native) => "h_N",
            (Skill::Low, Origin::Native) => "l_N",
            (Skill::High, Origin::NonNative) => "h_I",
            (Skill::Low, Origin::NonNative) => "l_I",
        }
    }

    pub fn index(self) -> usize {
        match (self.skill, self.origin) {
            (Skill::High, Origin::Native) => 0,
            (Skill::Low, Origin::Native) => 1,
            (Skill::High, Origin::NonNative) => 2,
            (Skill::Low, Origin::NonNative) => 3,
        }
    }

    pub fn is_native(self) -> bool {
        self.origin == Origin::Native
    }
}

/// A value per worker class, stored in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ByClass<T> {
    #[serde(rename = "h_N")]
    pub h_n: T,
    #[serde(rename = "l_N")]
    pub l_n: T,
    #[serde(rename = "h_I")]
    pub h_i: T,
    #[serde(rename = "l_I")]
    pub l_i: T,
}

impl<T: Copy> ByClass<T> {
    pub fn splat(v: T) -> Self {
        ByClass {
            h_n: v,
            l_n: v,
            h_i: v,
            l_i: v,
        }
    }

    pub fn from_fn(mut f: impl FnMut(WorkerClass) -> T) -> Self {
        ByClass {
            h_n: f(WorkerClass::H_N),
            l_n: f(WorkerClass::L_N),
            h_i: f(WorkerClass::H_I),
            l_i: f(WorkerClass::L_I),
        }
    }

    pub fn try_from_fn<E>(mut f: impl FnMut(WorkerClass) -> Result<T, E>) -> Result<Self, E> {
        Ok(ByClass {
            h_n: f(WorkerClass::H_N)?,
            l_n: f(WorkerClass::L_N)?,
            h_i: f(WorkerClass::H_I)?,
            l_i: f(WorkerClass::L_I)?,
        })
    }

    pub fn get(&self, class: WorkerClass) -> T {
        match class.index() {
            0 => self.h_n,
            1 => self.l_n,
            2 => self.h_i,
            _ => self.l_i,
        }
    }

    pub fn get_mut(&mut self, class: WorkerClass) -> &mut T {
        match class.index() {
            0 => &mut self.h_n,
            1 => &mut self.l_n,
            2 => &mut self.h_i,
            _ => &mut self.l_i,
        }
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(T) -> U) -> ByClass<U> {
        ByClass {
            h_n: f(self.h_n),
            l_n: f(self.l_n),
            h_i: f(self.h_i),
            l_i: f(self.l_i),
        }
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.h_n, self.l_n, self.h_i, self.l_i]
    }

    pub fn from_array(a: [T; 4]) -> Self {
        ByClass {
            h_n: a[0],
            l_n: a[1],
            h_i: a[2],
            l_i: a[3],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (WorkerClass, T)> + '_ {
        WorkerClass::ALL.into_iter().map(move |c| (c, self.get(c)))
    }
}

impl ByClass<f64> {
    pub fn sum(&self) -> f64 {
        self.h_n + self.l_n + self.h_i + self.l_i
    }

    /// Sum over the two classes of one skill.
    pub fn skill_total(&self, skill: Skill) -> f64 {
        match skill {
            Skill::High => self.h_n + self.h_i,
            Skill::Low => self.l_n + self.l_i,
        }
    }
}

/// A value per skill market.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BySkill<T> {
    pub h: T,
    pub l: T,
}

impl<T: Copy> BySkill<T> {
    pub fn splat(v: T) -> Self {
        BySkill { h: v, l: v }
    }

    pub fn from_fn(mut f: impl FnMut(Skill) -> T) -> Self {
        BySkill {
            h: f(Skill::High),
            l: f(Skill::Low),
        }
    }

    pub fn get(&self, skill: Skill) -> T {
        match skill {
            Skill::High => self.h,
            Skill::Low => self.l,
        }
    }

    pub fn get_mut(&mut self, skill: Skill) -> &mut T {
        match skill {
            Skill::High => &mut self.h,
            Skill::Low => &mut self.l,
        }
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(T) -> U) -> BySkill<U> {
        BySkill {
            h: f(self.h),
            l: f(self.l),
        }
    }
}
