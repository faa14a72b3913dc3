use thiserror::Error;

use crate::crypto::{xor_block, CryptoContext, PairingGroup};
use crate::protocol::{FinalReport, Identity, MasterKey, PublicParams, RoadConditionInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractedReport {
    pub rsu: Identity,
    pub info: RoadConditionInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AuthorityError {
    #[error("report failed verification")]
    VerificationFailed,
}

/// The application authority: holds `msk` and opens forwarded reports.
#[derive(Debug, Clone)]
pub struct ApplicationAuthority<G: PairingGroup> {
    params: PublicParams<G>,
    msk: MasterKey<G>,
}

impl<G: PairingGroup> ApplicationAuthority<G> {
    pub fn new(params: PublicParams<G>, msk: MasterKey<G>) -> Self {
        Self { params, msk }
    }

    /// Unmasks the RSU identity and road condition, then accepts the report
    /// iff `e(l1, h6(ID_R, h1(msk, ID_R), I)) == e(l2, P)`.
    pub fn process_alert(
        &self,
        ctx: &CryptoContext<G>,
        report: &FinalReport<G>,
    ) -> Result<ExtractedReport, AuthorityError> {
        let rsu = Identity(xor_block(
            &ctx.h(6, &[&ctx.encode(&self.params.p_pub)]).0,
            &report.l3,
        ));
        let msk_bytes = ctx.encode_scalar(self.msk.scalar());
        let info_block = xor_block(&ctx.h(6, &[rsu.as_bytes(), &msk_bytes]).0, &report.l4);
        let rsu_key = ctx.h(1, &[&msk_bytes, rsu.as_bytes()]);
        let point = ctx.h6_group(&[rsu.as_bytes(), rsu_key.as_bytes(), &info_block]);
        if !ctx.pairing_eq(&report.l1, &point, &report.l2, &self.params.generator) {
            return Err(AuthorityError::VerificationFailed);
        }
        let info = RoadConditionInfo::from_block(&info_block)
            .map_err(|_| AuthorityError::VerificationFailed)?;
        Ok(ExtractedReport { rsu, info })
    }
}
