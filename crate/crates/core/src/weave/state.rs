use crate::error::shape_err;
use crate::tensor::concat_channels;
use crate::{Result, Tensor};

/// Growing state of one woven scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleState {
    scale: usize,
    raw: Tensor,
    /// Bottom-up messages from the finer neighbor, oldest first.
    from_below: Vec<Tensor>,
    /// Top-down messages from the coarser neighbor, oldest first.
    from_above: Vec<Tensor>,
    iteration: usize,
}

impl ScaleState {
    pub fn new(scale: usize, raw: Tensor) -> Self {
        Self { scale, raw, from_below: Vec::new(), from_above: Vec::new(), iteration: 0 }
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn raw(&self) -> &Tensor {
        &self.raw
    }

    pub fn channels(&self) -> usize {
        self.raw.channels() + self.message_channels()
    }

    pub fn message_channels(&self) -> usize {
        self.from_below.iter().chain(&self.from_above).map(Tensor::channels).sum()
    }

    fn up_newest_first(&self) -> impl Iterator<Item = &Tensor> {
        self.from_below.iter().rev()
    }

    /// Full state in canonical order: `[up_t..up_1; raw; down_1..down_t]`.
    pub fn tensor(&self) -> Tensor {
        if self.message_channels() == 0 {
            return self.raw.clone();
        }
        let parts: Vec<&Tensor> = self
            .up_newest_first()
            .chain(std::iter::once(&self.raw))
            .chain(&self.from_above)
            .collect();
        concat_channels(&parts).expect("state parts share spatial size")
    }

    /// Message channels only, `[up_t..up_1; down_1..down_t]`, or `None` before
    /// the first exchange.
    pub fn messages_only(&self) -> Option<Tensor> {
        let parts: Vec<&Tensor> = self.up_newest_first().chain(&self.from_above).collect();
        if parts.is_empty() {
            None
        } else {
            Some(concat_channels(&parts).expect("state parts share spatial size"))
        }
    }

    /// Appends the messages received at the end of one iteration.
    pub fn receive(&mut self, from_below: Option<Tensor>, from_above: Option<Tensor>) -> Result<()> {
        for m in from_below.iter().chain(&from_above) {
            if (m.height(), m.width()) != (self.raw.height(), self.raw.width()) {
                return Err(shape_err!(
                    "scale {} received a {}x{} message, state is {}x{}",
                    self.scale,
                    m.height(),
                    m.width(),
                    self.raw.height(),
                    self.raw.width()
                ));
            }
        }
        self.from_below.extend(from_below);
        self.from_above.extend(from_above);
        self.iteration += 1;
        Ok(())
    }
}
